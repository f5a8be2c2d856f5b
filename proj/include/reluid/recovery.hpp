#pragma once
// Black-box reconstruction of shallow ReLU networks from input/output queries.
//
// Pipeline: kinks along random lines -> hyperplanes (seeded total-least-squares clusters)
// -> Jacobian jumps across each hyperplane (outer matrices v w^T) -> orientations from the
// global linear part -> output bias -> verification on fresh points.

#include <Eigen/Dense>

#include <atomic>
#include <bit>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "network.hpp"
#include "parallel.hpp"

namespace reluid {

struct BudgetExhausted : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Query-counted evaluation function. Copies share the counter; calls may come from several threads.
class Oracle {
 public:
  using Fn = std::function<std::vector<double>(std::span<const double>)>;

  Oracle(Fn f, std::size_t d, std::size_t k, std::size_t budget)
      : f_(std::move(f)), d_(d), k_(k), budget_(budget), used_(std::make_shared<std::atomic<std::size_t>>(0)) {}

  std::vector<double> operator()(std::span<const double> x) const {
    if (x.size() != d_) throw ShapeError("oracle query has wrong dimension");
    if (used_->fetch_add(1) >= budget_) {
      used_->fetch_sub(1);
      throw BudgetExhausted("oracle query budget of " + std::to_string(budget_) + " exhausted");
    }
    auto y = f_(x);
    if (y.size() != k_) throw ShapeError("oracle returned " + std::to_string(y.size()) + " outputs, expected " + std::to_string(k_));
    return y;
  }
  std::size_t input_dim() const { return d_; }
  std::size_t output_dim() const { return k_; }
  std::size_t budget() const { return budget_; }
  std::size_t queries() const { return used_->load(); }
  std::size_t remaining() const { return budget_ - std::min(budget_, queries()); }

 private:
  Fn f_;
  std::size_t d_, k_, budget_;
  std::shared_ptr<std::atomic<std::size_t>> used_;
};

inline std::size_t default_query_budget(std::size_t d, std::size_t max_units = 16) { return 200 * max_units * (d + 2); }

template <class S>
Oracle network_oracle(const Params<S>& p, std::size_t budget) {
  auto q = std::make_shared<Params<double>>(convert<double>(p));
  return Oracle([q](std::span<const double> x) { return forward(*q, x); }, p.arch().input_dim(),
                p.arch().output_dim(), budget);
}

struct Hyperplane {
  std::vector<double> w;  // unit norm, largest-magnitude entry positive
  double b = 0;
  std::size_t support = 0;  // kink points in the cluster
  double residual = 0;      // max distance of cluster points to the fitted plane
};

struct DetectOptions {
  double box_radius = 3.0;
  std::size_t line_count = 0;  // 0: 6 (d + 1) + 4
  std::size_t grid = 64;       // samples per line
  double tol = 1e-6;           // second-difference threshold relative to the line's function scale
  double cluster_tol = 1e-7;   // inlier distance relative to box_radius
  std::uint64_t seed = 0;
};

struct DetectionResult {
  std::vector<Hyperplane> planes;
  std::vector<std::vector<double>> kinks;
  std::size_t dropped_kinks = 0;
  bool partial = false;
  std::vector<std::string> warnings;
};

namespace detail {

using Vd = Eigen::VectorXd;

inline double dotv(std::span<const double> a, std::span<const double> b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline void canonical_sign(std::vector<double>& w, double& b) {
  std::size_t k = 0;
  for (std::size_t i = 1; i < w.size(); ++i)
    if (std::fabs(w[i]) > std::fabs(w[k])) k = i;
  if (w[k] < 0) {
    for (auto& x : w) x = -x;
    b = -b;
  }
}

// Total least squares plane through points; returns false when fewer than one point.
inline bool tls_fit(const std::vector<std::vector<double>>& pts, std::vector<double>& w, double& b) {
  if (pts.empty()) return false;
  const std::size_t d = pts[0].size();
  Vd c = Vd::Zero(d);
  for (const auto& p : pts) c += Eigen::Map<const Vd>(p.data(), d);
  c /= double(pts.size());
  if (d == 1) {
    w = {1.0};
    b = -c(0);
    return true;
  }
  Eigen::MatrixXd A(pts.size(), d);
  for (std::size_t i = 0; i < pts.size(); ++i) A.row(i) = Eigen::Map<const Vd>(pts[i].data(), d) - c;
  if (pts.size() < d) return false;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullV);
  Vd n = svd.matrixV().col(d - 1);
  w.assign(n.data(), n.data() + d);
  b = -n.dot(c);
  return true;
}

struct LineKinks {
  std::vector<std::vector<double>> kinks;
  std::vector<double> direction;
  std::vector<double> spacing;  // grid spacing along the line, per kink
  bool exhausted = false;
};

// Kinks of g = <c, f> along the line p + t u, t in [t0, t1]. Runs of flagged second differences
// that are too long, or whose two-piece model fails verification, are resampled on a finer grid.
inline LineKinks probe_line(const Oracle& f, const std::vector<double>& c, const std::vector<double>& p,
                            const std::vector<double>& u, double t0, double t1, const DetectOptions& opt) {
  LineKinks out;
  out.direction = u;
  const std::size_t d = p.size();
  auto at = [&](double t) {
    std::vector<double> x(d);
    for (std::size_t i = 0; i < d; ++i) x[i] = p[i] + t * u[i];
    return x;
  };
  auto g = [&](double t) { return dotv(c, f(at(t))); };
  double scale = 0;

  std::function<void(const std::vector<double>&, const std::vector<double>&, int)> scan =
      [&](const std::vector<double>& ts, const std::vector<double>& gs, int depth) {
        const std::size_t G = ts.size();
        const double h = ts[1] - ts[0];
        std::vector<char> flag(G, 0);
        for (std::size_t i = 1; i + 1 < G; ++i) flag[i] = std::fabs(gs[i - 1] - 2 * gs[i] + gs[i + 1]) > opt.tol * scale;
        for (std::size_t s = 1; s + 1 < G;) {
          if (!flag[s]) {
            ++s;
            continue;
          }
          std::size_t e = s;
          while (e + 1 < G - 1 && flag[e + 1]) ++e;
          const std::size_t next = e + 1;
          if (s < 2 || e + 2 >= G) {
            s = next;
            continue;
          }
          const double vtol = 1e-9 * scale;
          bool located = false;
          if (e - s <= 1) {
            const double mL = (gs[s - 1] - gs[s - 2]) / h, bL = gs[s - 1] - mL * ts[s - 1];
            const double mR = (gs[e + 2] - gs[e + 1]) / h, bR = gs[e + 1] - mR * ts[e + 1];
            auto left = [&](double t) { return mL * t + bL; };
            auto right = [&](double t) { return mR * t + bR; };
            double lo = ts[s - 1], hi = ts[e + 1], tau = 0;
            if (std::fabs(mL - mR) > 0) {
              tau = (bR - bL) / (mL - mR);
              if (tau > lo && tau < hi) {
                const double dv = std::min(tau - lo, hi - tau) * 0.5;
                located = std::fabs(g(tau - dv) - left(tau - dv)) <= vtol && std::fabs(g(tau + dv) - right(tau + dv)) <= vtol;
              }
            }
            if (!located && depth > 0) {
              // bisection on "still on the left piece"
              while (hi - lo > 1e-10 * opt.box_radius) {
                double mid = 0.5 * (lo + hi);
                if (std::fabs(g(mid) - left(mid)) <= vtol) lo = mid;
                else hi = mid;
              }
              tau = 0.5 * (lo + hi);
              const double dv = std::min(0.25 * h, 0.5 * std::min(tau - ts[s - 1], ts[e + 1] - tau));
              located = dv > 0 && std::fabs(g(tau - dv) - left(tau - dv)) <= 10 * vtol &&
                        std::fabs(g(tau + dv) - right(tau + dv)) <= 10 * vtol;
            }
            if (located) {
              out.kinks.push_back(at(tau));
              out.spacing.push_back(h);
            }
          }
          if (!located && depth < 4) {
            const double a = ts[s - 2], b = ts[e + 2];
            const std::size_t M = 4 * (e - s + 5) + 1;
            std::vector<double> ts2(M), gs2(M);
            for (std::size_t i = 0; i < M; ++i) {
              ts2[i] = i + 1 == M ? b : a + (b - a) * double(i) / double(M - 1);
              gs2[i] = i == 0 ? gs[s - 2] : i + 1 == M ? gs[e + 2] : g(ts2[i]);
            }
            scan(ts2, gs2, depth + 1);
          }
          s = next;
        }
      };

  try {
    const std::size_t G = opt.grid;
    std::vector<double> ts(G), gs(G);
    for (std::size_t i = 0; i < G; ++i) {
      ts[i] = t0 + (t1 - t0) * double(i) / double(G - 1);
      gs[i] = g(ts[i]);
      scale = std::max(scale, std::fabs(gs[i]));
    }
    scale = std::max(scale, 1e-300);
    scan(ts, gs, 0);
  } catch (const BudgetExhausted&) {
    out.exhausted = true;
  }
  return out;
}

// Gradient of g = <c, f> at x by forward differences.
inline std::vector<double> fd_gradient(const Oracle& f, const std::vector<double>& c, const std::vector<double>& x, double s) {
  const double g0 = dotv(c, f(x));
  std::vector<double> gr(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    auto y = x;
    y[i] += s;
    gr[i] = (dotv(c, f(y)) - g0) / s;
  }
  return gr;
}

inline double plane_dist(const Hyperplane& h, std::span<const double> x) { return std::fabs(dotv(h.w, x) + h.b); }

}  // namespace detail

// Random lines through [-R, R]^d; kinks located on each line; kinks grouped into hyperplanes.
inline DetectionResult detect_hyperplanes(const Oracle& f, const DetectOptions& opt = {}) {
  DetectionResult res;
  const std::size_t d = f.input_dim(), k = f.output_dim();
  const double R = opt.box_radius;
  const std::size_t lines = opt.line_count ? opt.line_count : 6 * (d + 1) + 4;
  std::mt19937_64 crng(opt.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> c(k);
  for (auto& v : c) v = gauss(crng);

  std::vector<detail::LineKinks> per_line(lines);
  parallel_for(lines, [&](std::size_t li) {
    std::seed_seq ss{opt.seed, std::uint64_t{7}, static_cast<std::uint64_t>(li)};
    std::mt19937_64 rng(ss);
    std::uniform_real_distribution<double> unif(-R, R);
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<double> p(d), u(d);
    for (auto& v : p) v = unif(rng);
    double n = 0;
    do {
      n = 0;
      for (auto& v : u) {
        v = g(rng);
        n += v * v;
      }
    } while (n == 0);
    for (auto& v : u) v /= std::sqrt(n);
    double t0 = -1e300, t1 = 1e300;
    for (std::size_t i = 0; i < d; ++i) {
      if (u[i] == 0) continue;
      double a = (-R - p[i]) / u[i], b = (R - p[i]) / u[i];
      t0 = std::max(t0, std::min(a, b));
      t1 = std::min(t1, std::max(a, b));
    }
    // vary the grid per line so nearby kinks split on some line
    auto lopt = opt;
    lopt.grid = opt.grid + static_cast<std::size_t>(rng() % (opt.grid / 2 + 1));
    per_line[li] = detail::probe_line(f, c, p, u, t0, t1, lopt);
  });
  std::vector<std::vector<double>> kink_dir;
  std::vector<double> kink_h;
  for (auto& L : per_line) {
    if (L.exhausted) res.partial = true;
    for (std::size_t i = 0; i < L.kinks.size(); ++i) {
      res.kinks.push_back(L.kinks[i]);
      kink_dir.push_back(L.direction);
      kink_h.push_back(L.spacing[i]);
    }
  }

  // seeded clustering: normal from the gradient jump at one kink, then TLS refits
  const double tight = opt.cluster_tol * R, loose = std::max(1e-6 * R, 10 * tight);
  std::vector<char> used(res.kinks.size(), 0);
  try {
    for (std::size_t seed = 0; seed < res.kinks.size(); ++seed) {
      if (used[seed]) continue;
      std::size_t left = 0;
      for (char u : used) left += !u;
      if (left < d + 1) break;
      const auto& x = res.kinks[seed];
      const double dn = 0.25 * kink_h[seed];
      std::vector<double> xp(d), xm(d);
      for (std::size_t i = 0; i < d; ++i) {
        xp[i] = x[i] + dn * kink_dir[seed][i];
        xm[i] = x[i] - dn * kink_dir[seed][i];
      }
      const double s = 1e-6 * R;
      auto gp = detail::fd_gradient(f, c, xp, s), gm = detail::fd_gradient(f, c, xm, s);
      Hyperplane hp;
      hp.w.resize(d);
      double nn = 0;
      for (std::size_t i = 0; i < d; ++i) {
        hp.w[i] = gp[i] - gm[i];
        nn += hp.w[i] * hp.w[i];
      }
      if (!(nn > 0)) {
        used[seed] = 1;
        ++res.dropped_kinks;
        continue;
      }
      for (auto& v : hp.w) v /= std::sqrt(nn);
      hp.b = -detail::dotv(hp.w, x);
      std::vector<std::size_t> members;
      double thr = loose;
      for (int round = 0; round < 3; ++round) {
        members.clear();
        for (std::size_t j = 0; j < res.kinks.size(); ++j)
          if (!used[j] && detail::plane_dist(hp, res.kinks[j]) <= thr) members.push_back(j);
        if (members.size() < d + 1) break;
        std::vector<std::vector<double>> pts;
        for (auto j : members) pts.push_back(res.kinks[j]);
        detail::tls_fit(pts, hp.w, hp.b);
        thr = tight;
      }
      if (members.size() < d + 1) {
        used[seed] = 1;
        ++res.dropped_kinks;
        continue;
      }
      hp.support = members.size();
      hp.residual = 0;
      for (auto j : members) {
        used[j] = 1;
        hp.residual = std::max(hp.residual, detail::plane_dist(hp, res.kinks[j]));
      }
      detail::canonical_sign(hp.w, hp.b);
      res.planes.push_back(std::move(hp));
    }
  } catch (const BudgetExhausted&) {
    res.partial = true;
  }
  std::size_t unassigned = 0;
  for (char u : used) unassigned += !u;
  res.dropped_kinks += unassigned;
  if (res.dropped_kinks) res.warnings.push_back(std::to_string(res.dropped_kinks) + " kink points not assigned to any hyperplane");
  if (res.partial) res.warnings.push_back("query budget exhausted during detection; result is partial");
  return res;
}

struct OuterEstimate {
  Eigen::MatrixXd outer;  // k x d, J(x+) - J(x-)
  std::vector<double> x0;
  double isolation = 0;   // distance from x0 to the nearest other hyperplane
  bool ambiguous = false;
};

struct OuterOptions {
  double box_radius = 3.0;
  double step = 1e-5;  // forward-difference step relative to box_radius
  std::uint64_t seed = 0;
};

namespace detail {

inline Eigen::MatrixXd fd_jacobian(const Oracle& f, const std::vector<double>& x, double s) {
  auto y0 = f(x);
  Eigen::MatrixXd J(y0.size(), x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    auto z = x;
    z[i] += s;
    auto y = f(z);
    for (std::size_t r = 0; r < y0.size(); ++r) J(r, i) = (y[r] - y0[r]) / s;
  }
  return J;
}

}  // namespace detail

// Jacobian jump across each hyperplane, measured at a point of the plane far from the others.
inline std::vector<OuterEstimate> recover_outer(const Oracle& f, const std::vector<Hyperplane>& planes,
                                                const OuterOptions& opt = {}) {
  const std::size_t d = f.input_dim();
  const double R = opt.box_radius;
  std::vector<OuterEstimate> out(planes.size());
  parallel_for(planes.size(), [&](std::size_t v) {
    std::seed_seq ss{opt.seed, std::uint64_t{11}, static_cast<std::uint64_t>(v)};
    std::mt19937_64 rng(ss);
    std::uniform_real_distribution<double> unif(-R, R);
    const auto& P = planes[v];
    double best = -1;
    std::vector<double> bx;
    for (int a = 0; a < 64; ++a) {
      std::vector<double> x(d);
      for (auto& e : x) e = unif(rng) * 0.8;
      double z = detail::dotv(P.w, x) + P.b;
      for (std::size_t i = 0; i < d; ++i) x[i] -= z * P.w[i];
      bool inside = true;
      for (double e : x) inside = inside && std::fabs(e) <= R;
      if (!inside) continue;
      double gap = R;
      for (std::size_t o = 0; o < planes.size(); ++o)
        if (o != v) gap = std::min(gap, detail::plane_dist(planes[o], x));
      if (gap > best) {
        best = gap;
        bx = x;
      }
    }
    auto& est = out[v];
    est.isolation = std::max(best, 0.0);
    if (best < 1e-3 * R) {
      est.ambiguous = true;
      est.outer = Eigen::MatrixXd::Zero(f.output_dim(), d);
      return;
    }
    const double delta = std::min(0.5 * best, 0.05 * R);
    const double s = std::min(opt.step * R, 0.25 * delta);
    std::vector<double> xp(d), xm(d);
    for (std::size_t i = 0; i < d; ++i) {
      xp[i] = bx[i] + delta * P.w[i];
      xm[i] = bx[i] - delta * P.w[i];
    }
    est.x0 = bx;
    est.outer = detail::fd_jacobian(f, xp, s) - detail::fd_jacobian(f, xm, s);
  });
  return out;
}

struct RecoveredUnit {
  std::vector<double> w;  // oriented unit normal: the unit is v ReLU(<w, x> + b)
  double b = 0;
  std::vector<double> v;
  Eigen::MatrixXd outer;
  int orientation = 1;  // +1 if active on the side <w_detected, x> + b_detected > 0
  double rank1_residual = 0;
};

struct RecoveredModel {
  std::vector<RecoveredUnit> units;
  std::vector<double> c;                     // output bias
  std::vector<std::vector<double>> linear;   // k x d linear part left after orientation; zero for valid targets
  std::optional<Params<double>> params;      // absent without units or with a nonzero linear part
  double verify_error = 0;           // max |oracle - model| on fresh points
  double verify_scale = 0;
  bool verified = false;
  bool partial = false;
  std::size_t queries = 0;
  std::vector<std::string> violations;  // hypothesis violations detected along the way
  std::vector<std::string> warnings;
  DetectionResult detection;
};

struct RecoverOptions {
  DetectOptions detect;
  OuterOptions outer;
  std::size_t verify_points = 1000;
  double verify_tol = 1e-6;
  double rank1_tol = 1e-6;
  std::size_t orientation_cap = 22;
  std::optional<std::size_t> expected_units;
};

namespace detail {

inline std::vector<double> model_eval(const std::vector<RecoveredUnit>& units, const std::vector<double>& c,
                                      std::span<const double> x, const std::vector<std::vector<double>>* linear = nullptr) {
  std::vector<double> y = c;
  if (linear)
    for (std::size_t r = 0; r < y.size(); ++r) y[r] += dotv((*linear)[r], x);
  for (const auto& u : units) {
    double z = dotv(u.w, x) + u.b;
    if (z > 0)
      for (std::size_t r = 0; r < y.size(); ++r) y[r] += u.v[r] * z;
  }
  return y;
}

}  // namespace detail

inline RecoveredModel recover_shallow(const Oracle& f, const RecoverOptions& opt = {}) {
  RecoveredModel m;
  const std::size_t d = f.input_dim(), k = f.output_dim();
  const double R = opt.detect.box_radius;
  try {
    m.detection = detect_hyperplanes(f, opt.detect);
    m.partial = m.detection.partial;
    m.warnings = m.detection.warnings;
    auto outer_opt = opt.outer;
    outer_opt.box_radius = R;
    auto outers = recover_outer(f, m.detection.planes, outer_opt);

    // factor each jump as v w^T
    std::vector<Hyperplane> kept;
    for (std::size_t i = 0; i < outers.size(); ++i) {
      const auto& P = m.detection.planes[i];
      if (outers[i].ambiguous) {
        m.violations.push_back("hyperplane " + std::to_string(i) + " has no isolated neighbourhood in the box");
        continue;
      }
      const auto& O = outers[i].outer;
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(O, Eigen::ComputeThinU | Eigen::ComputeThinV);
      const auto& sv = svd.singularValues();
      if (sv.size() == 0 || sv(0) <= 1e-9) {
        m.warnings.push_back("hyperplane " + std::to_string(i) + " carries no Jacobian jump; dropped");
        continue;
      }
      RecoveredUnit u;
      u.rank1_residual = sv.size() > 1 ? sv(1) / sv(0) : 0.0;
      Eigen::VectorXd wv = Eigen::Map<const Eigen::VectorXd>(P.w.data(), d);
      double align = std::fabs(svd.matrixV().col(0).dot(wv));
      if (u.rank1_residual > opt.rank1_tol || align < 1 - opt.rank1_tol) {
        m.violations.push_back("jump across hyperplane " + std::to_string(i) + " is not rank one along its normal");
        continue;
      }
      Eigen::VectorXd v = O * wv;
      u.outer = O;
      u.w = P.w;
      u.b = P.b;
      u.v.assign(v.data(), v.data() + k);
      m.units.push_back(std::move(u));
      kept.push_back(P);
    }
    if (opt.expected_units && *opt.expected_units != m.units.size())
      m.violations.push_back("recovered " + std::to_string(m.units.size()) + " units, expected " +
                             std::to_string(*opt.expected_units) + " (collinear twins merge, cancelling twins vanish)");

    // global linear part of r(x) = f(x) - sum v ReLU(<w,x>+b) from d+1 spread points
    std::vector<std::vector<double>> simplex(d + 1, std::vector<double>(d, 0.0));
    for (std::size_t i = 0; i < d; ++i) simplex[i + 1][i] = 0.5 * R;
    std::vector<std::vector<double>> rvals;
    for (const auto& x : simplex) {
      auto y = f(x);
      auto mdl = detail::model_eval(m.units, std::vector<double>(k, 0.0), x);
      for (std::size_t r = 0; r < k; ++r) y[r] -= mdl[r];
      rvals.push_back(std::move(y));
    }
    Eigen::MatrixXd Lp(k, d);
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t r = 0; r < k; ++r) Lp(r, i) = (rvals[i + 1][r] - rvals[0][r]) / (0.5 * R);

    // flipping unit j from ReLU(z) to ReLU(-z) adds v_j z, i.e. changes the linear part by outer_j;
    // find the subset D with sum_{D} outer = -Lp
    const std::size_t h = m.units.size();
    double scale = Lp.norm();
    for (const auto& u : m.units) scale += u.outer.norm();
    scale = std::max(scale, 1e-300);
    std::uint64_t best_mask = 0;
    double best = (Lp).norm(), second = std::numeric_limits<double>::infinity();
    if (h > opt.orientation_cap) {
      m.violations.push_back("too many units for the orientation search");
    } else if (h > 0) {
      Eigen::MatrixXd acc = Lp;
      std::uint64_t mask = 0;
      for (std::uint64_t g = 1; g < (std::uint64_t{1} << h); ++g) {
        std::size_t j = static_cast<std::size_t>(std::countr_zero(g));
        mask ^= std::uint64_t{1} << j;
        if (mask >> j & 1) acc += m.units[j].outer;
        else acc -= m.units[j].outer;
        double r = acc.norm();
        if (r < best) {
          second = best;
          best = r;
          best_mask = mask;
        } else if (r < second) {
          second = r;
        }
      }
    }
    if (best > 1e-6 * scale && h > 0) {
      m.violations.push_back("affine residue has a linear part no orientation explains (twins or a non-shallow target)");
    } else if (second <= 1e-6 * scale) {
      m.violations.push_back("orientation is not unique (target is reducible)");
    }
    Eigen::MatrixXd A = Lp;
    for (std::size_t j = 0; j < h; ++j)
      if (best_mask >> j & 1) {
        A += m.units[j].outer;
        auto& u = m.units[j];
        u.orientation = -1;
        for (auto& x : u.w) x = -x;
        u.b = -u.b;
      }
    // v ReLU(-z) = v ReLU(z) - v z, so flipped units need v unchanged and the residue re-derived
    m.linear.assign(k, std::vector<double>(d, 0.0));
    if (best > 1e-6 * scale)
      for (std::size_t r = 0; r < k; ++r)
        for (std::size_t i = 0; i < d; ++i) m.linear[r][i] = A(r, i);
    m.c.assign(k, 0.0);
    {
      std::vector<double> acc(k, 0.0);
      for (const auto& x : simplex) {
        auto y = f(x);
        auto mdl = detail::model_eval(m.units, std::vector<double>(k, 0.0), x, &m.linear);
        for (std::size_t r = 0; r < k; ++r) acc[r] += y[r] - mdl[r];
      }
      for (std::size_t r = 0; r < k; ++r) m.c[r] = acc[r] / double(simplex.size());
    }
    if (h > 0 && best <= 1e-6 * scale) {
      Params<double> p(Architecture({d, h, k}));
      for (std::size_t j = 0; j < h; ++j) {
        for (std::size_t i = 0; i < d; ++i) p.weights(1)(j, i) = m.units[j].w[i];
        p.bias(1)[j] = m.units[j].b;
        for (std::size_t r = 0; r < k; ++r) p.weights(2)(r, j) = m.units[j].v[r];
      }
      p.bias(2) = m.c;
      m.params = std::move(p);
    }

    // verification on fresh points
    std::mt19937_64 rng(opt.detect.seed ^ 0x9e3779b97f4a7c15ULL);
    std::uniform_real_distribution<double> unif(-R, R);
    double err = 0, sc = 0;
    for (std::size_t n = 0; n < opt.verify_points; ++n) {
      std::vector<double> x(d);
      for (auto& e : x) e = unif(rng);
      auto y = f(x);
      auto yh = detail::model_eval(m.units, m.c, x, &m.linear);
      for (std::size_t r = 0; r < k; ++r) {
        err = std::max(err, std::fabs(y[r] - yh[r]));
        sc = std::max(sc, std::fabs(y[r]));
      }
    }
    m.verify_error = err;
    m.verify_scale = std::max(sc, 1.0);
    m.verified = err <= opt.verify_tol * m.verify_scale;
    if (!m.verified) m.violations.push_back("reconstruction differs from the target on fresh points");
  } catch (const BudgetExhausted& e) {
    m.partial = true;
    m.warnings.push_back(e.what());
  }
  m.queries = f.queries();
  return m;
}

struct UnitCount {
  std::size_t a = 0, b = 0;
  bool equal() const { return a == b; }
};

inline UnitCount count_units(const Oracle& fa, const Oracle& fb, const DetectOptions& opt = {}) {
  return {detect_hyperplanes(fa, opt).planes.size(), detect_hyperplanes(fb, opt).planes.size()};
}

}  // namespace reluid
