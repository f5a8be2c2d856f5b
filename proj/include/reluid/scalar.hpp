#pragma once
// Scalar traits shared by the exact (mpq_class) and float (double) code paths.

#include <gmpxx.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace reluid {

using Rational = mpq_class;

enum class ScalarMode { exact, float64 };

template <class S>
struct NumTraits;

template <>
struct NumTraits<double> {
  static constexpr bool exact = false;
  static constexpr ScalarMode mode = ScalarMode::float64;
  static double from_double(double x) { return x; }
  static double to_double(double x) { return x; }
  static double abs(double x) { return std::fabs(x); }
  static int sign(double x) { return (x > 0) - (x < 0); }
  static bool is_zero(double x, double atol) { return std::fabs(x) <= atol; }
  // relative comparison; rtol = 0 means bitwise-equal values
  static bool near(double a, double b, double rtol) {
    return std::fabs(a - b) <= rtol * std::max({1.0, std::fabs(a), std::fabs(b)});
  }
  static double parse(const std::string& s) {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("bad float literal: " + s);
    return v;
  }
  static std::string to_string(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
  }
};

template <>
struct NumTraits<Rational> {
  static constexpr bool exact = true;
  static constexpr ScalarMode mode = ScalarMode::exact;
  static Rational from_double(double x) {
    if (!std::isfinite(x)) throw std::domain_error("non-finite value cannot become a rational");
    return Rational(x);
  }
  static double to_double(const Rational& x) { return x.get_d(); }
  static Rational abs(const Rational& x) { return ::abs(x); }
  static int sign(const Rational& x) { return sgn(x); }
  static bool is_zero(const Rational& x, double) { return sgn(x) == 0; }
  static bool near(const Rational& a, const Rational& b, double) { return a == b; }
  static Rational parse(const std::string& s) {
    Rational r;
    if (r.set_str(s, 10) != 0) throw std::invalid_argument("bad rational literal: " + s);
    r.canonicalize();
    return r;
  }
  static std::string to_string(const Rational& x) { return x.get_str(); }
};

// Tolerances used by float-mode predicates. Exact mode ignores them.
struct Tolerance {
  double atol = 0.0;  // zero tests (admissibility, reducibility sums)
  double rtol = 0.0;  // equality of values (embeddings, reconstructions)
};

template <class S>
S scalar_cast(double x) {
  return NumTraits<S>::from_double(x);
}

inline const char* to_string(ScalarMode m) { return m == ScalarMode::exact ? "exact" : "float"; }

}  // namespace reluid
