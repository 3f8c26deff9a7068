#pragma once

// Statistical primitives: nearest-rank percentiles, the Student-t
// distribution, one-sample and Welch two-sample t-tests, and the survey
// sample-size calculator.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "error.hpp"

namespace lowfreq::stats {

enum class Alternative { Less, Greater, TwoSided };

inline std::string_view to_string(Alternative a) {
  switch (a) {
    case Alternative::Less: return "less";
    case Alternative::Greater: return "greater";
    case Alternative::TwoSided: return "two-sided";
  }
  return "unknown";
}

inline Alternative alternative_from_string(std::string_view s) {
  if (s == "less") return Alternative::Less;
  if (s == "greater") return Alternative::Greater;
  if (s == "two-sided" || s == "two.sided") return Alternative::TwoSided;
  throw DomainError("unknown alternative '" + std::string(s) + "'");
}

struct TTestResult {
  double t = 0;
  double df = 1;
  double p = 1;
  Alternative alternative = Alternative::TwoSided;

  bool rejects(double alpha) const { return p < alpha; }
};

// 1-indexed nearest rank: sorted[ceil(pct/100 * n) - 1].
inline double nearest_rank_percentile(std::span<const double> values, double pct) {
  if (values.empty()) throw DomainError("percentile of an empty list");
  if (!(pct > 0 && pct <= 100)) throw DomainError("percentile must lie in (0, 100]");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  auto rank = static_cast<std::size_t>(std::ceil(pct * n / 100.0));
  rank = std::clamp<std::size_t>(rank, 1, sorted.size());
  return sorted[rank - 1];
}

namespace detail {

// Continued fraction for the incomplete beta function (modified Lentz).
inline double beta_continued_fraction(double a, double b, double x) {
  constexpr double kTiny = 1e-300;
  constexpr double kEps = 1e-16;
  constexpr int kMaxIter = 100000;
  const double qab = a + b, qap = a + 1, qam = a - 1;
  double c = 1;
  double d = 1 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1) < kEps) return h;
  }
  return h;
}

}  // namespace detail

// Regularized incomplete beta I_x(a, b). `y` is 1 - x, passed separately so
// callers can supply it without cancellation.
inline double incomplete_beta(double a, double b, double x, double y) {
  if (!(a > 0 && b > 0)) throw DomainError("incomplete beta needs a, b > 0");
  if (x <= 0) return 0;
  if (y <= 0) return 1;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log(y);
  const double front = std::exp(log_front);
  if (x < (a + 1) / (a + b + 2)) return front * detail::beta_continued_fraction(a, b, x) / a;
  return 1 - front * detail::beta_continued_fraction(b, a, y) / b;
}

inline double incomplete_beta(double a, double b, double x) { return incomplete_beta(a, b, x, 1 - x); }

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

// Student-t CDF with `df` degrees of freedom (df may be fractional).
inline double student_t_cdf(double t, double df) {
  if (!(df > 0)) throw DomainError("Student-t degrees of freedom must be positive");
  if (std::isnan(t)) return std::numeric_limits<double>::quiet_NaN();
  if (t == 0) return 0.5;
  if (std::isinf(t)) return t > 0 ? 1.0 : 0.0;
  if (std::isinf(df)) return normal_cdf(t);
  const double t2 = t * t;
  // P(|T| > |t|) / 2
  const double tail = 0.5 * incomplete_beta(df / 2, 0.5, df / (df + t2), t2 / (df + t2));
  return t > 0 ? 1 - tail : tail;
}

inline double p_value(double t, double df, Alternative alt) {
  switch (alt) {
    case Alternative::Less: return student_t_cdf(t, df);
    case Alternative::Greater: return student_t_cdf(-t, df);
    case Alternative::TwoSided: return std::min(1.0, 2 * student_t_cdf(-std::fabs(t), df));
  }
  return 1;
}

namespace detail {

struct Moments {
  double mean = 0;
  double variance = 0;  // unbiased
};

// Mean and variance of (v - shift).
inline Moments moments(std::span<const double> v, double shift) {
  const double n = static_cast<double>(v.size());
  double sum = 0;
  for (double x : v) sum += x - shift;
  const double mean = sum / n;
  double ss = 0;
  for (double x : v) {
    const double d = (x - shift) - mean;
    ss += d * d;
  }
  return {mean, ss / (n - 1)};
}

}  // namespace detail

// Zero-variance samples whose mean equals mu0 give t = 0 instead of an error.
inline TTestResult one_sample_t_test(std::span<const double> sample, double mu0,
                                     Alternative alt = Alternative::TwoSided) {
  if (sample.size() < 2) throw DomainError("one-sample t-test needs at least 2 observations");
  const auto m = detail::moments(sample, mu0);
  const double n = static_cast<double>(sample.size());
  TTestResult r;
  r.alternative = alt;
  r.df = n - 1;
  if (m.variance == 0) {
    if (m.mean != 0) throw DomainError("one-sample t-test: zero variance with mean != mu0 gives infinite t");
    r.t = 0;
  } else {
    r.t = m.mean / std::sqrt(m.variance / n);
  }
  r.p = p_value(r.t, r.df, alt);
  return r;
}

// Welch's unequal-variance test of mean(x) - mean(y) with
// Welch-Satterthwaite degrees of freedom.
inline TTestResult welch_t_test(std::span<const double> x, std::span<const double> y,
                                Alternative alt = Alternative::TwoSided) {
  if (x.size() < 2 || y.size() < 2) throw DomainError("Welch t-test needs at least 2 observations per sample");
  const double shift = x.front();
  const auto mx = detail::moments(x, shift);
  const auto my = detail::moments(y, shift);
  const double nx = static_cast<double>(x.size()), ny = static_cast<double>(y.size());
  const double vx = mx.variance / nx, vy = my.variance / ny;
  const double se2 = vx + vy;
  TTestResult r;
  r.alternative = alt;
  if (se2 == 0) {
    if (mx.mean != my.mean) throw DomainError("Welch t-test: zero variance with unequal means gives infinite t");
    r.t = 0;
    r.df = nx + ny - 2;
  } else {
    r.t = (mx.mean - my.mean) / std::sqrt(se2);
    r.df = se2 * se2 / (vx * vx / (nx - 1) + vy * vy / (ny - 1));
  }
  r.p = p_value(r.t, r.df, alt);
  return r;
}

struct SampleSizeParams {
  double z = 2.58;
  double margin = 0.05;  // e, as a fraction
  double p_hat = 0.5;
  std::optional<double> population;  // N; enables the finite-population correction
};

// n0 = z^2 p(1-p) / e^2, corrected to n0 / (1 + (n0 - 1) / N) when N is
// given, then rounded to nearest.
inline std::int64_t required_sample_size(const SampleSizeParams& params) {
  if (!(params.z > 0)) throw DomainError("critical value z must be positive");
  if (!(params.margin > 0 && params.margin < 1)) throw DomainError("margin of error must lie in (0, 1)");
  if (!(params.p_hat >= 0 && params.p_hat <= 1)) throw DomainError("proportion must lie in [0, 1]");
  if (params.population && !(*params.population >= 1)) throw DomainError("population must be at least 1");
  double n = params.z * params.z * params.p_hat * (1 - params.p_hat) / (params.margin * params.margin);
  if (params.population) n = n / (1 + (n - 1) / *params.population);
  return std::max<std::int64_t>(1, std::llround(n));
}

// Tabulated two-sided critical values for the supported confidence levels.
inline double z_for_confidence(int confidence_percent) {
  switch (confidence_percent) {
    case 90: return 1.645;
    case 95: return 1.96;
    case 99: return 2.58;
  }
  throw DomainError("confidence level must be one of 90, 95, 99");
}

}  // namespace lowfreq::stats
