// reluid: command-line front end.

#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <mutex>

#include "CLI11.hpp"
#include "reluid/io.hpp"
#include "reluid/reluid.hpp"

using namespace reluid;

namespace {

struct ExpectationMismatch {
  std::string expected, got;
};

struct Context {
  std::string out;
  std::string expect;
  bool timings = false;
  std::uint64_t seed = 0;
  json report;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

  void input(const std::string& path, const std::string& text) { report["inputs"][path] = fnv1a_hex(text); }
  void check_expect(const std::string& got, std::initializer_list<std::string> aliases = {}) {
    if (expect.empty()) return;
    if (expect == got) return;
    for (const auto& a : aliases)
      if (expect == a) return;
    throw ExpectationMismatch{expect, got};
  }
};

struct Loaded {
  AnyParams params;
  std::string text;
};

Loaded load(const std::string& path) {
  std::string text = read_file(path);
  return {any_from_json(parse_json_text(text, path)), text};
}

template <class S>
json rescaling_json(const Rescaling<S>& r) {
  json a = json::array();
  for (const auto& layer : r.lambda) a.push_back(vector_json(layer));
  return a;
}

json permutation_json(const Permutation& p) {
  json a = json::array();
  for (const auto& layer : p.pi) a.push_back(layer);
  return a;
}

json neuron_json(const PathIndex& idx, NeuronId n) { return idx.neuron_name(n.layer, n.index); }

ConstraintSet parse_constraint(const std::string& s) {
  if (s == "unconstrained") return ConstraintSet::unconstrained();
  if (s == "zero-output-bias") return ConstraintSet::zero_output_bias();
  if (s == "zero-all-bias") return ConstraintSet::zero_all_bias();
  throw std::invalid_argument("unknown constraint '" + s + "' (unconstrained, zero-output-bias, zero-all-bias)");
}

// ---- embed

struct EmbedArgs {
  std::string net, blocks;
  std::size_t budget = kDefaultPathBudget;
};

void run_embed(Context& ctx, const EmbedArgs& a) {
  auto L = load(a.net);
  ctx.input(a.net, L.text);
  std::visit(
      [&](const auto& p) {
        auto e = embed(p, a.budget);
        json keys = json::array();
        for (std::size_t i = 0; i < e.index.p_size(); ++i) keys.push_back(e.index.key(i));
        ctx.report["scalar_mode"] = std::is_same_v<decltype(e.phi), std::vector<Rational>> ? "exact" : "float";
        ctx.report["paths"] = std::move(keys);
        ctx.report["phi"] = vector_json(e.phi);
        if (!a.blocks.empty()) {
          if (p.depth() < 2) throw UnsupportedDepth("per-output blocks need at least one hidden layer");
          json files = json::array();
          for (std::size_t eta = 0; eta < p.arch().output_dim(); ++eta) {
            json b;
            b["eta"] = eta;
            auto in = e.input_block(eta);
            json rows = json::array();
            for (std::size_t q = 0; q < in.rows; ++q) {
              json row = json::array();
              for (std::size_t mu = 0; mu < in.cols; ++mu) row.push_back(scalar_json(in(q, mu)));
              rows.push_back(std::move(row));
            }
            b["input_block"] = std::move(rows);
            b["hidden_block"] = vector_json(e.hidden_block(eta));
            std::string path = a.blocks + "_eta" + std::to_string(eta) + ".json";
            write_file(path, dump(b));
            files.push_back(path);
          }
          ctx.report["block_files"] = std::move(files);
        }
      },
      L.params);
}

// ---- compare

struct CompareArgs {
  std::string a, b;
  double rtol = 1e-9;
  std::size_t budget = 100000;
};

template <class S>
void compare_typed(Context& ctx, const Params<S>& a, const Params<S>& b, const CompareArgs& args) {
  Tolerance tol{0.0, NumTraits<S>::exact ? 0.0 : args.rtol};
  auto w = check_scaling_equivalent(a, b, tol);
  if (w.kind != Relation::S && w.kind != Relation::undecidable) {
    PsOptions o;
    o.tol = tol;
    o.budget = args.budget;
    w = check_ps_equivalent(a, b, o);
  }
  std::string rel = w.kind == Relation::undecidable ? "inconclusive" : to_string(w.kind);
  ctx.report["relation"] = rel;
  if (w.kind == Relation::undecidable) ctx.report["detail"] = to_string(w.kind);
  json wit = json::object();
  if (w.permutation) wit["pi"] = permutation_json(*w.permutation);
  if (w.rescaling) wit["lambda"] = rescaling_json(*w.rescaling);
  ctx.report["witness"] = std::move(wit);
  if (!w.reason.empty()) ctx.report["reason"] = w.reason;
  ctx.report["candidates_tried"] = w.candidates_tried;
  ctx.check_expect(rel);
}

void run_compare(Context& ctx, const CompareArgs& args) {
  auto A = load(args.a), B = load(args.b);
  ctx.input(args.a, A.text);
  ctx.input(args.b, B.text);
  if (A.params.index() == 0 && B.params.index() == 0) {
    ctx.report["scalar_mode"] = "exact";
    compare_typed(ctx, std::get<0>(A.params), std::get<0>(B.params), args);
    return;
  }
  auto as_float = [](const AnyParams& p) {
    return std::visit([](const auto& q) { return convert<double>(q); }, p);
  };
  ctx.report["scalar_mode"] = "float";
  compare_typed(ctx, as_float(A.params), as_float(B.params), args);
}

// ---- analyze

struct AnalyzeArgs {
  std::string net, constraint = "unconstrained";
  double rtol = 1e-9;
  std::size_t cap = 22, samples = 200;
};

template <class S>
void analyze_typed(Context& ctx, const Params<S>& p, const AnalyzeArgs& a) {
  PathIndex idx(p.arch());
  auto& r = ctx.report;
  auto adm = is_admissible(p);
  json ja;
  ja["admissible"] = adm.admissible;
  ja["zero_incoming"] = json::array();
  ja["zero_outgoing"] = json::array();
  for (auto n : adm.zero_incoming) ja["zero_incoming"].push_back(neuron_json(idx, n));
  for (auto n : adm.zero_outgoing) ja["zero_outgoing"].push_back(neuron_json(idx, n));
  r["admissibility"] = std::move(ja);

  auto tw = find_twins(p, a.rtol);
  json jt;
  jt["positive_pairs"] = tw.positive_pairs;
  jt["negative_pairs"] = tw.negative_pairs;
  jt["classes"] = json::array();
  for (const auto* c : tw.nontrivial()) {
    json jc;
    jc["layer"] = c->layer;
    auto names = [&](const std::vector<std::size_t>& v) {
      json out = json::array();
      for (auto i : v) out.push_back(idx.neuron_name(c->layer, i));
      return out;
    };
    jc["members"] = names(c->members);
    jc["positive"] = names(c->positive);
    jc["negative"] = names(c->negative);
    jt["classes"].push_back(std::move(jc));
  }
  r["twins"] = std::move(jt);

  auto irr = is_irreducible(p, a.cap, NumTraits<S>::exact ? 0.0 : 1e-12);
  json ji;
  ji["irreducible"] = irr.irreducible == Verdict::yes ? json(true) : irr.irreducible == Verdict::no ? json(false) : json("inconclusive");
  if (irr.irreducible == Verdict::no) {
    ji["witness_layer"] = irr.witness_layer;
    ji["witness"] = json::array();
    for (auto i : irr.witness) ji["witness"].push_back(idx.neuron_name(irr.witness_layer, i));
  }
  ji["subsets_checked"] = irr.subsets_checked;
  if (!irr.note.empty()) ji["note"] = irr.note;
  r["irreducibility"] = std::move(ji);

  const auto constraint = parse_constraint(a.constraint);
  r["constraint"] = a.constraint;
  if (p.depth() == 2) {
    auto cls = classify_shallow(p, constraint, a.rtol);
    json js;
    js["kind"] = to_string(cls.kind);
    if (cls.negative_pair) {
      json jn;
      jn["nu1"] = idx.neuron_name(1, cls.negative_pair->nu1);
      jn["nu2"] = idx.neuron_name(1, cls.negative_pair->nu2);
      jn["branch"] = to_string(cls.negative_pair->branch);
      jn["verdict"] = to_string(cls.negative_pair->verdict);
      js["negative_pair"] = std::move(jn);
    }
    r["shallow"] = std::move(js);
  }

  if (adm.admissible && p.depth() >= 2) {
    auto space = p.depth() == 2 ? shallow_activation_space(p, a.rtol) : sample_activation_space(p, a.samples, ctx.seed);
    r["actdim"] = space.actdim;
    r["actdim_qualifier"] = space.qualifier;
  }
  auto cert = nondegeneracy_certificate(p, constraint, a.samples, ctx.seed);
  json jc;
  jc["verdict"] = to_string(cert.verdict);
  jc["reason"] = cert.reason;
  jc["dim_V"] = cert.dim_V;
  jc["dim_V_exact"] = cert.dim_V_exact;
  r["nondegeneracy"] = std::move(jc);
  const std::string v = to_string(cert.verdict);
  ctx.check_expect(v, {cert.verdict == Degeneracy::degenerate ? "degenerate"
                       : cert.verdict == Degeneracy::nondegenerate ? "nondegenerate" : "inconclusive"});
}

void run_analyze(Context& ctx, const AnalyzeArgs& a) {
  auto L = load(a.net);
  ctx.input(a.net, L.text);
  std::visit([&](const auto& p) { analyze_typed(ctx, p, a); }, L.params);
}

// ---- actspace

struct ActArgs {
  std::string net;
  std::size_t samples = 200;
  double margin = 1e-9;
};

void run_actspace(Context& ctx, const ActArgs& a) {
  auto L = load(a.net);
  ctx.input(a.net, L.text);
  std::visit(
      [&](const auto& p) {
        auto s = sample_activation_space(p, a.samples, ctx.seed, a.margin);
        ctx.report["actdim"] = s.actdim;
        ctx.report["ambient"] = s.ambient;
        ctx.report["qualifier"] = s.qualifier;
        ctx.report["basis"] = s.basis;
        ctx.report["witnesses"] = s.witnesses;
      },
      L.params);
}

// ---- identset

struct IdentArgs {
  std::string net;
  std::size_t samples = 200, trials = 500;
  double eps = 1e-3;
};

void run_identset(Context& ctx, const IdentArgs& a) {
  auto L = load(a.net);
  ctx.input(a.net, L.text);
  std::visit(
      [&](const auto& p) {
        auto space = sample_activation_space(p, a.samples, ctx.seed);
        auto F = construct_identification_set(p, space);
        auto& r = ctx.report;
        r["actdim"] = space.actdim;
        r["size"] = F.points.size();
        r["bound"] = F.bound_used;
        r["points"] = F.points;
        json anchors = json::array();
        for (const auto& an : F.anchors) anchors.push_back({{"z", an.z}, {"r", an.r}, {"first_point", an.first_point}});
        r["anchors"] = std::move(anchors);
        ValidationOptions vo;
        vo.trials = a.trials;
        vo.eps = a.eps;
        vo.seed = ctx.seed;
        auto v = validate_identification_set(p, F, vo);
        json jv;
        jv["scaling_trials"] = v.scaling_trials;
        jv["scaling_failures"] = v.scaling_failures;
        jv["perturbation_trials"] = v.perturbation_trials;
        jv["perturbation_equivalent"] = v.perturbation_equivalent;
        jv["structured_trials"] = v.structured_trials;
        jv["falsifiers"] = json::array();
        for (const auto& f : v.falsifiers) jv["falsifiers"].push_back({{"source", f.source}, {"trial", f.trial}, {"theta_prime", f.theta_prime}});
        if (std::isfinite(v.min_separation)) jv["min_separation"] = v.min_separation;
        r["validation"] = std::move(jv);
        ctx.check_expect(v.falsifiers.empty() && v.scaling_failures == 0 ? "validated" : "falsified");
      },
      L.params);
}

// ---- recover

// Persistent child process answering one query per line.
class ExecOracle {
 public:
  explicit ExecOracle(const std::string& cmd) {
    int in[2], out[2];
    if (pipe(in) != 0 || pipe(out) != 0) throw std::runtime_error("pipe failed");
    pid_ = fork();
    if (pid_ < 0) throw std::runtime_error("fork failed");
    if (pid_ == 0) {
      dup2(in[0], 0);
      dup2(out[1], 1);
      close(in[0]);
      close(in[1]);
      close(out[0]);
      close(out[1]);
      execl("/bin/sh", "sh", "-c", cmd.c_str(), static_cast<char*>(nullptr));
      _exit(127);
    }
    close(in[0]);
    close(out[1]);
    to_ = fdopen(in[1], "w");
    from_ = fdopen(out[0], "r");
  }
  ~ExecOracle() {
    if (to_) fclose(to_);
    if (from_) fclose(from_);
    if (pid_ > 0) waitpid(pid_, nullptr, 0);
  }
  ExecOracle(const ExecOracle&) = delete;
  ExecOracle& operator=(const ExecOracle&) = delete;

  std::vector<double> query(std::span<const double> x, std::size_t k) {
    std::lock_guard lock(mu_);
    for (std::size_t i = 0; i < x.size(); ++i) std::fprintf(to_, i ? " %.17g" : "%.17g", x[i]);
    std::fputc('\n', to_);
    std::fflush(to_);
    std::vector<double> y(k);
    for (auto& v : y)
      if (std::fscanf(from_, "%lf", &v) != 1) throw std::runtime_error("oracle process gave no answer");
    return y;
  }

 private:
  pid_t pid_ = -1;
  FILE* to_ = nullptr;
  FILE* from_ = nullptr;
  std::mutex mu_;
};

struct RecoverArgs {
  std::string target, exec, network_out;
  std::size_t dim = 0, outputs = 0, budget = 0, max_units = 16, lines = 0;
  long expected_units = -1;
  double box = 3.0;
};

void run_recover(Context& ctx, const RecoverArgs& a) {
  if (a.target.empty() == a.exec.empty()) throw std::invalid_argument("give exactly one of --target and --exec");
  std::optional<Loaded> target;
  std::shared_ptr<ExecOracle> child;
  std::size_t d = a.dim, k = a.outputs;
  if (!a.target.empty()) {
    target = load(a.target);
    ctx.input(a.target, target->text);
    std::visit([&](const auto& p) {
      d = p.arch().input_dim();
      k = p.arch().output_dim();
      if (p.depth() != 2) throw UnsupportedDepth("recovery needs a shallow target");
    }, target->params);
  } else {
    if (!d || !k) throw std::invalid_argument("--exec needs --dim and --outputs");
    child = std::make_shared<ExecOracle>(a.exec);
    ctx.report["exec"] = a.exec;
  }
  const std::size_t budget = a.budget ? a.budget : default_query_budget(d, a.max_units);
  Oracle f = target ? std::visit([&](const auto& p) { return network_oracle(p, budget); }, target->params)
                    : Oracle([child, k](std::span<const double> x) { return child->query(x, k); }, d, k, budget);
  RecoverOptions o;
  o.detect.seed = ctx.seed;
  o.detect.box_radius = a.box;
  o.detect.line_count = a.lines;
  o.outer.seed = ctx.seed;
  if (a.expected_units >= 0) o.expected_units = static_cast<std::size_t>(a.expected_units);
  auto m = recover_shallow(f, o);

  auto& r = ctx.report;
  json units = json::array();
  for (const auto& u : m.units)
    units.push_back({{"w", u.w}, {"b", u.b}, {"v", u.v}, {"orientation", u.orientation}, {"rank1_residual", u.rank1_residual}});
  r["units"] = std::move(units);
  r["c"] = m.c;
  r["linear"] = m.linear;
  r["network"] = m.params ? to_json(*m.params) : json(nullptr);
  json dg;
  dg["hyperplanes"] = m.detection.planes.size();
  dg["kinks"] = m.detection.kinks.size();
  dg["dropped_kinks"] = m.detection.dropped_kinks;
  dg["queries"] = m.queries;
  dg["budget"] = budget;
  dg["verify_error"] = m.verify_error;
  dg["verify_scale"] = m.verify_scale;
  dg["verified"] = m.verified;
  dg["partial"] = m.partial;
  dg["violations"] = m.violations;
  dg["warnings"] = m.warnings;
  r["diagnostics"] = std::move(dg);
  if (target && m.params) {
    auto planted = std::visit([](const auto& p) { return convert<double>(p); }, target->params);
    PsOptions po;
    po.tol.rtol = 1e-8;
    r["target_relation"] = to_string(check_ps_equivalent(planted, *m.params, po).kind);
  }
  if (!a.network_out.empty() && m.params) write_file(a.network_out, dump(to_json(*m.params)));
  const std::string status = m.verified && m.violations.empty() && !m.partial ? "recovered" : "not-recovered";
  r["status"] = status;
  ctx.check_expect(status);
}

// ---- examples

struct ExampleArgs {
  std::string name, dir = ".", from, t = "1", t0 = "0", t1 = "1", eps = "1/10", M = "1";
  std::size_t nu1 = 0, nu2 = 1, layer = 1;
  std::vector<std::size_t> subset;
};

void run_examples(Context& ctx, const ExampleArgs& a) {
  auto q = [](const std::string& s) { return NumTraits<Rational>::parse(s); };
  auto& r = ctx.report;
  r["name"] = a.name;
  json files = json::array();
  std::filesystem::create_directories(a.dir);
  auto put = [&](const std::string& stem, const Params<Rational>& p) {
    std::string path = a.dir + "/" + stem + ".json";
    write_file(path, dump(to_json(p)));
    files.push_back(path);
  };
  auto put_pair = [&](const ExamplePair<Rational>& e) {
    put(a.name + "_theta", e.theta);
    put(a.name + "_theta_prime", e.theta_prime);
    json dom;
    dom["kind"] = to_string(e.domain.kind);
    if (e.domain.kind == DomainKind::half_line)
      dom["neuron"] = PathIndex(e.theta.arch()).neuron_name(e.domain.neuron.layer, e.domain.neuron.index);
    if (e.domain.kind != DomainKind::all_inputs) dom["bound"] = e.domain.bound.get_str();
    r["domain"] = std::move(dom);
    r["claimed"] = to_string(e.claimed);
  };
  auto source = [&]() {
    if (a.from.empty()) throw std::invalid_argument("example '" + a.name + "' needs --from network.json");
    auto L = load(a.from);
    ctx.input(a.from, L.text);
    if (L.params.index() != 0) throw std::invalid_argument("--from network must be in exact mode");
    return std::get<0>(L.params);
  };
  const std::string& n = a.name;
  if (n == "identity") put(n, identity_family<Rational>(q(a.t)));
  else if (n == "identity-pair") put_pair(identity_pair<Rational>(q(a.t0), q(a.t1)));
  else if (n == "nonlocal") put_pair(nonlocal_pair<Rational>());
  else if (n == "abs") put(n, abs_network<Rational>());
  else if (n == "abs-shifted") put(n, abs_shifted<Rational>(q(a.t)));
  else if (n == "abs-shift-pair") put_pair(abs_shift_pair<Rational>(q(a.t)));
  else if (n == "positive-twin-collapse") {
    auto p = source();
    put_pair(positive_twin_collapse(p, NeuronId{a.layer, a.nu1}, NeuronId{a.layer, a.nu2}, q(a.eps)));
  } else if (n == "negative-twin-collapse") {
    auto p = source();
    put_pair(negative_twin_collapse(p, NeuronId{a.layer, a.nu1}, NeuronId{a.layer, a.nu2}, q(a.M)));
  } else if (n == "reducibility-collapse") {
    auto p = source();
    put_pair(reducibility_collapse(p, a.layer, a.subset));
  } else if (n == "case2a") {
    auto p = source();
    put_pair(case2a_bias_witness(p, q(a.eps)));
  } else {
    throw std::invalid_argument("unknown example '" + n + "'");
  }
  r["files"] = std::move(files);
}

int emit(Context& ctx) {
  if (ctx.timings)
    ctx.report["timings"] = {{"total_seconds", std::chrono::duration<double>(std::chrono::steady_clock::now() - ctx.start).count()}};
  const std::string text = dump(ctx.report);
  if (ctx.out.empty()) std::cout << text;
  else write_file(ctx.out, text);
  return 0;
}

int fail(const std::string& kind, const std::string& msg) {
  json e{{"error", kind}, {"message", msg}};
  std::cerr << e.dump() << "\n";
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Path embeddings, equivalence checks, identifiability diagnostics and shallow-network recovery for ReLU networks"};
  app.require_subcommand(1);
  Context ctx;
  auto common = [&](CLI::App* sc, bool sampling) {
    sc->add_option("--out", ctx.out, "Write the JSON report to this file instead of stdout");
    sc->add_option("--expect", ctx.expect, "Exit with code 2 when the verdict differs");
    sc->add_flag("--timings", ctx.timings, "Include wall-clock timings in the report");
    if (sampling) sc->add_option("--seed", ctx.seed, "Random seed")->capture_default_str();
  };

  EmbedArgs ea;
  auto* embed_cmd = app.add_subcommand("embed", "Path embedding of a network");
  embed_cmd->add_option("network", ea.net)->required();
  embed_cmd->add_option("--blocks", ea.blocks, "Write per-output block files with this path prefix");
  embed_cmd->add_option("--budget", ea.budget, "Maximum number of paths")->capture_default_str();
  common(embed_cmd, false);

  CompareArgs ca;
  auto* cmp = app.add_subcommand("compare", "Decide S / PS equivalence of two networks");
  cmp->add_option("a", ca.a)->required();
  cmp->add_option("b", ca.b)->required();
  cmp->add_option("--rtol", ca.rtol, "Relative tolerance in float mode")->capture_default_str();
  cmp->add_option("--budget", ca.budget, "Matching candidates tried by the PS search")->capture_default_str();
  common(cmp, false);

  AnalyzeArgs aa;
  auto* an = app.add_subcommand("analyze", "Admissibility, twins, irreducibility, classification, degeneracy");
  an->add_option("network", aa.net)->required();
  an->add_option("--constraint", aa.constraint, "unconstrained | zero-output-bias | zero-all-bias")->capture_default_str();
  an->add_option("--rtol", aa.rtol, "Collinearity tolerance in float mode")->capture_default_str();
  an->add_option("--cap", aa.cap, "Largest layer width for subset enumeration")->capture_default_str();
  an->add_option("--samples", aa.samples, "Activation samples for deep networks")->capture_default_str();
  common(an, true);

  ActArgs aca;
  auto* act = app.add_subcommand("actspace", "Sampled activation space");
  act->add_option("network", aca.net)->required();
  act->add_option("--samples", aca.samples)->capture_default_str();
  act->add_option("--margin", aca.margin, "Minimum |pre-activation| of accepted samples")->capture_default_str();
  common(act, true);

  IdentArgs ia;
  auto* ids = app.add_subcommand("identset", "Finite identification set and its validation");
  ids->add_option("network", ia.net)->required();
  ids->add_option("--samples", ia.samples)->capture_default_str();
  ids->add_option("--trials", ia.trials)->capture_default_str();
  ids->add_option("--eps", ia.eps)->capture_default_str();
  common(ids, true);

  RecoverArgs ra;
  auto* rec = app.add_subcommand("recover", "Reconstruct a shallow network from queries");
  rec->add_option("--target", ra.target, "Network JSON used as a simulated oracle");
  rec->add_option("--exec", ra.exec, "Command answering one whitespace-separated query per line");
  rec->add_option("--dim", ra.dim, "Input dimension (with --exec)");
  rec->add_option("--outputs", ra.outputs, "Output dimension (with --exec)");
  rec->add_option("--budget", ra.budget, "Query budget (default 200 * max-units * (d + 2))");
  rec->add_option("--max-units", ra.max_units)->capture_default_str();
  rec->add_option("--expect-units", ra.expected_units, "Report a violation when the unit count differs");
  rec->add_option("--lines", ra.lines, "Probe lines (default 6 (d + 1) + 4)");
  rec->add_option("--box", ra.box, "Probe box half-width")->capture_default_str();
  rec->add_option("--network-out", ra.network_out, "Also write the recovered network JSON here");
  common(rec, true);

  ExampleArgs xa;
  auto* ex = app.add_subcommand("examples", "Write example networks and collapse constructions");
  ex->add_option("name", xa.name,
                 "identity | identity-pair | nonlocal | abs | abs-shifted | abs-shift-pair | positive-twin-collapse | "
                 "negative-twin-collapse | reducibility-collapse | case2a")
      ->required();
  ex->add_option("--dir", xa.dir)->capture_default_str();
  ex->add_option("--from", xa.from, "Source network for collapse constructions");
  ex->add_option("--t", xa.t)->capture_default_str();
  ex->add_option("--t0", xa.t0)->capture_default_str();
  ex->add_option("--t1", xa.t1)->capture_default_str();
  ex->add_option("--eps", xa.eps)->capture_default_str();
  ex->add_option("--M", xa.M)->capture_default_str();
  ex->add_option("--layer", xa.layer)->capture_default_str();
  ex->add_option("--nu1", xa.nu1)->capture_default_str();
  ex->add_option("--nu2", xa.nu2)->capture_default_str();
  ex->add_option("--subset", xa.subset, "Neuron indices for reducibility-collapse");
  common(ex, false);

  CLI11_PARSE(app, argc, argv);

  try {
    auto* sc = app.get_subcommands().front();
    ctx.report["command"] = sc->get_name();
    ctx.report["inputs"] = json::object();
    ctx.report["seed"] = ctx.seed;
    if (sc == embed_cmd) run_embed(ctx, ea);
    else if (sc == cmp) run_compare(ctx, ca);
    else if (sc == an) run_analyze(ctx, aa);
    else if (sc == act) run_actspace(ctx, aca);
    else if (sc == ids) run_identset(ctx, ia);
    else if (sc == rec) run_recover(ctx, ra);
    else run_examples(ctx, xa);
    return emit(ctx);
  } catch (const ExpectationMismatch& m) {
    emit(ctx);
    std::cerr << json{{"expectation", "mismatch"}, {"expected", m.expected}, {"got", m.got}}.dump() << "\n";
    return 2;
  } catch (const MalformedInput& e) {
    return fail("malformed-input", e.what());
  } catch (const ShapeError& e) {
    return fail("shape-mismatch", e.what());
  } catch (const PathBudgetExceeded& e) {
    return fail("budget-exceeded", e.what());
  } catch (const BudgetExhausted& e) {
    return fail("budget-exceeded", e.what());
  } catch (const UnsupportedDepth& e) {
    return fail("unsupported-depth", e.what());
  } catch (const std::exception& e) {
    return fail("error", e.what());
  }
}
