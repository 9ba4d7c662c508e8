#include "d2d/specfun.hpp"

#include <numbers>

namespace d2d {

namespace {

constexpr int kMaxIterations = 10000;
constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kTiny = 1e-300;

// gamma(s, x) by the power series; converges for all x, fast for x < s + 1.
double lower_gamma_series(double s, double x) {
  double term = 1.0 / s;
  double sum = term;
  for (int n = 1; n < kMaxIterations; ++n) {
    term *= x / (s + n);
    sum += term;
    if (std::abs(term) < std::abs(sum) * kEps) return sum * std::exp(s * std::log(x) - x);
  }
  throw SpecialFunctionError("lower incomplete gamma series did not converge");
}

// Gamma(s, x) by the Legendre continued fraction (modified Lentz), x >= s + 1.
double upper_gamma_fraction(double s, double x) {
  double b = x + 1.0 - s;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxIterations; ++i) {
    const double an = -i * (i - s);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) return std::exp(s * std::log(x) - x) * h;
  }
  throw SpecialFunctionError("upper incomplete gamma continued fraction did not converge");
}

}  // namespace

double upper_gamma(double s, double x) {
  if (!(s > 0.0) || !(x >= 0.0)) throw SpecialFunctionError("upper_gamma needs s > 0 and x >= 0");
  if (x == 0.0) return std::tgamma(s);
  if (std::isinf(x)) return 0.0;
  if (x < s + 1.0) return std::tgamma(s) - lower_gamma_series(s, x);
  return upper_gamma_fraction(s, x);
}

double lower_gamma(double s, double x) {
  if (!(s > 0.0) || !(x >= 0.0)) throw SpecialFunctionError("lower_gamma needs s > 0 and x >= 0");
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return std::tgamma(s);
  if (x < s + 1.0) return lower_gamma_series(s, x);
  return std::tgamma(s) - upper_gamma_fraction(s, x);
}

double expint_e1_scaled(double x) {
  if (!(x > 0.0)) throw SpecialFunctionError("E1 needs x > 0");
  if (x <= 1.0) return std::exp(x) * expint_e1(x);
  // Continued fraction e^x E1(x) = 1/(x+1- 1/(x+3- 4/(x+5- ...))).
  double b = x + 1.0;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxIterations; ++i) {
    const double an = -static_cast<double>(i) * i;
    b += 2.0;
    d = 1.0 / (an * d + b);
    c = b + an / c;
    const double del = c * d;
    h *= del;
    if (std::abs(del - 1.0) < kEps) return h;
  }
  throw SpecialFunctionError("E1 continued fraction did not converge");
}

double expint_e1(double x) {
  if (!(x > 0.0)) throw SpecialFunctionError("E1 needs x > 0");
  if (x > 1.0) return std::exp(-x) * expint_e1_scaled(x);
  // E1(x) = -gamma - ln x - sum_k (-x)^k / (k k!)
  double sum = 0.0;
  double fact = 1.0;
  for (int k = 1; k < kMaxIterations; ++k) {
    fact *= -x / k;
    const double del = -fact / k;
    sum += del;
    if (std::abs(del) < std::abs(sum) * kEps) break;
  }
  return -std::numbers::egamma - std::log(x) + sum;
}

double expint_ei(double x) {
  if (!(x < 0.0)) throw SpecialFunctionError("expint_ei is only defined here for x < 0");
  return -expint_e1(-x);
}

double xi1(double alpha) {
  if (!(alpha > 2.0)) throw SpecialFunctionError("xi1 diverges for alpha <= 2; use the alpha = 2 model");
  const double z = 2.0 * std::numbers::pi / alpha;
  return z / std::sin(z);
}

double xi2(double alpha, double x) {
  if (!(x > 0.0) || !(alpha >= 2.0)) throw SpecialFunctionError("xi2 needs x > 0 and alpha >= 2");
  const double c = 0.5 * alpha;
  const double upper = std::pow(x, -2.0 / alpha);
  const QuadSpec spec{1e-12, 1e-15, 400};
  auto head = [c](double t) { return 1.0 / (1.0 + std::pow(t, c)); };
  double value = integrate(head, 0.0, std::min(upper, 1.0), spec);
  if (upper > 1.0) {
    // int_1^U dt/(1+t^c) with t = 1/s.
    auto tail = [c](double s) { return std::pow(s, c - 2.0) / (1.0 + std::pow(s, c)); };
    value += integrate(tail, 1.0 / upper, 1.0, spec);
  }
  return value;
}

}  // namespace d2d
