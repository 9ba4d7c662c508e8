#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace d2d {

struct QuadSpec {
  double rel_tol = 1e-8;
  double abs_tol = 1e-12;
  int max_subdivisions = 200;
};

class QuadratureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SpecialFunctionError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Upper incomplete gamma Gamma(s, x) = int_x^inf t^(s-1) e^-t dt.
double upper_gamma(double s, double x);
/// Lower incomplete gamma gamma(s, x) = Gamma(s) - Gamma(s, x), computed
/// without cancellation for small x.
double lower_gamma(double s, double x);

/// Exponential integral E1(x), x > 0.
double expint_e1(double x);
/// exp(x) * E1(x), finite for large x where E1 underflows.
double expint_e1_scaled(double x);
/// Ei(x) for x < 0, i.e. -E1(-x).
double expint_ei(double x);

/// int_0^inf dt / (1 + t^(alpha/2)); needs alpha > 2.
double xi1(double alpha);
/// int_0^(x^(-2/alpha)) dt / (1 + t^(alpha/2)), x > 0.
double xi2(double alpha, double x);

namespace detail {

// 21-point Gauss-Kronrod rule (QUADPACK qk21).
inline constexpr std::array<double, 11> kXgk = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.0};
inline constexpr std::array<double, 11> kWgk = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077958109831074, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};
inline constexpr std::array<double, 5> kWg = {
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338};

struct Segment {
  double lo, hi, value, error, magnitude;
};

template <class F>
Segment gauss_kronrod21(F& f, double lo, double hi) {
  constexpr double eps = std::numeric_limits<double>::epsilon();
  const double center = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  const double fc = f(center);
  double resg = 0.0;
  double resk = kWgk[10] * fc;
  double resabs = std::abs(resk);
  std::array<double, 10> f1{}, f2{};
  for (int j = 0; j < 10; ++j) {
    const double dx = half * kXgk[j];
    f1[j] = f(center - dx);
    f2[j] = f(center + dx);
    const double s = f1[j] + f2[j];
    resk += kWgk[j] * s;
    resabs += kWgk[j] * (std::abs(f1[j]) + std::abs(f2[j]));
    if (j % 2 == 1) resg += kWg[j / 2] * s;
  }
  const double reskh = 0.5 * resk;
  double resasc = kWgk[10] * std::abs(fc - reskh);
  for (int j = 0; j < 10; ++j) resasc += kWgk[j] * (std::abs(f1[j] - reskh) + std::abs(f2[j] - reskh));
  const double value = resk * half;
  resabs *= std::abs(half);
  resasc *= std::abs(half);
  double err = std::abs((resk - resg) * half);
  if (resasc != 0.0 && err != 0.0) err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  if (resabs > std::numeric_limits<double>::min() / (50.0 * eps)) err = std::max(50.0 * eps * resabs, err);
  return {lo, hi, value, err, resabs};
}

inline bool by_error(const Segment& a, const Segment& b) { return a.error < b.error; }

}  // namespace detail

/// Globally adaptive Gauss-Kronrod integration of f over [lo, hi].
/// Bisects the segment with the largest error estimate until the total error
/// is within max(abs_tol, rel_tol * |I|); throws QuadratureError when the
/// subdivision cap is reached first.
template <class F>
double integrate(F&& f, double lo, double hi, const QuadSpec& spec = {}) {
  if (!(lo <= hi)) throw std::invalid_argument("integrate: lo must not exceed hi");
  if (lo == hi) return 0.0;
  constexpr double eps = std::numeric_limits<double>::epsilon();
  std::vector<detail::Segment> heap;
  heap.reserve(static_cast<std::size_t>(spec.max_subdivisions) + 1);
  heap.push_back(detail::gauss_kronrod21(f, lo, hi));
  double total = heap.front().value;
  double error = heap.front().error;
  double magnitude = heap.front().magnitude;
  for (;;) {
    const double tol = std::max({spec.abs_tol, spec.rel_tol * std::abs(total), 50.0 * eps * magnitude});
    if (error <= tol) return total;
    if (!std::isfinite(total)) throw QuadratureError("integrate: non-finite integrand");
    if (static_cast<int>(heap.size()) >= spec.max_subdivisions)
      throw QuadratureError("integrate: subdivision limit reached");
    std::pop_heap(heap.begin(), heap.end(), detail::by_error);
    const detail::Segment worst = heap.back();
    heap.pop_back();
    const double mid = 0.5 * (worst.lo + worst.hi);
    if (!(mid > worst.lo && mid < worst.hi)) {
      // Interval cannot be split further; accept its contribution.
      error -= worst.error;
      heap.push_back({worst.lo, worst.hi, worst.value, 0.0, worst.magnitude});
      std::push_heap(heap.begin(), heap.end(), detail::by_error);
      continue;
    }
    const auto left = detail::gauss_kronrod21(f, worst.lo, mid);
    const auto right = detail::gauss_kronrod21(f, mid, worst.hi);
    total += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    magnitude += left.magnitude + right.magnitude - worst.magnitude;
    heap.push_back(left);
    std::push_heap(heap.begin(), heap.end(), detail::by_error);
    heap.push_back(right);
    std::push_heap(heap.begin(), heap.end(), detail::by_error);
  }
}

/// int_0^hi f for integrands concentrated near 0 on a known length scale.
/// A single adaptive pass can step over a spike much narrower than hi, so
/// the range is cut at scale, 8 scale, 64 scale, ... Once a piece integrates
/// to exactly 0 the (underflowed) remainder is skipped.
template <class F>
double integrate_multiscale(F&& f, double hi, double scale, const QuadSpec& spec = {}) {
  if (!(hi > 0.0)) return 0.0;
  if (!(scale > 0.0) || !std::isfinite(scale) || scale >= hi) return integrate(f, 0.0, hi, spec);
  double total = integrate(f, 0.0, scale, spec);
  for (double b = scale; b < hi; b *= 8.0) {
    const double piece = integrate(f, b, std::min(hi, 8.0 * b), spec);
    total += piece;
    if (piece == 0.0) break;
  }
  return total;
}

/// int_lo^inf f via the map t = lo + u / (1 - u), u in [0, 1).
template <class F>
double integrate_to_infinity(F&& f, double lo, const QuadSpec& spec = {}) {
  auto g = [&](double u) {
    const double w = 1.0 - u;
    const double v = f(lo + u / w) / (w * w);
    return std::isfinite(v) ? v : 0.0;
  };
  return integrate(g, 0.0, 1.0, spec);
}

}  // namespace d2d
