#include "vegspot/bessel.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "vegspot/errors.hpp"

namespace vegspot::bessel {
namespace {

constexpr double kEps = 1e-16;
constexpr double kTiny = 1e-300;

void check_args(int n, double x) {
  if (!(x > 0.0) || !std::isfinite(x))
    throw domain_error("Bessel argument must be positive and finite, got " + std::to_string(x));
  if (n < 0 || n > kMaxOrder)
    throw domain_error("Bessel order out of range [0,64]: " + std::to_string(n));
}

// Power series for I_n, all terms positive.
double i_series(int n, double x) {
  double half = 0.5 * x;
  double pre = 1.0;
  for (int k = 1; k <= n; ++k) pre *= half / k;
  double q = half * half;
  double term = 1.0, sum = 1.0;
  for (int k = 1; k < 500; ++k) {
    term *= q / (k * static_cast<double>(n + k));
    sum += term;
    if (term < kEps * sum) break;
  }
  return pre * sum;
}

// K_0 and K_1 from the logarithmic series, unscaled. Valid for x <= 2.
void k01_series(double x, double& k0, double& k1) {
  const double euler = std::numbers::egamma;
  double half = 0.5 * x;
  double lg = std::log(half);
  double q = half * half;
  double i0 = i_series(0, x), i1 = i_series(1, x);

  // K0 = -(ln(x/2)+gamma) I0 + sum_{k>=1} H_k q^k/(k!)^2
  double term = 1.0, harmonic = 0.0, s0 = 0.0;
  for (int k = 1; k < 200; ++k) {
    term *= q / (static_cast<double>(k) * k);
    harmonic += 1.0 / k;
    double add = harmonic * term;
    s0 += add;
    if (add < kEps * std::abs(s0)) break;
  }
  k0 = -(lg + euler) * i0 + s0;

  // K1 = 1/x + ln(x/2) I1 - (x/4) sum_{k>=0} (psi(k+1)+psi(k+2)) q^k/(k!(k+1)!)
  double psi1 = -euler;        // psi(k+1)
  double psi2 = 1.0 - euler;   // psi(k+2)
  term = 1.0;
  double s1 = (psi1 + psi2) * term;
  for (int k = 1; k < 200; ++k) {
    term *= q / (static_cast<double>(k) * (k + 1));
    psi1 += 1.0 / k;
    psi2 += 1.0 / (k + 1);
    double add = (psi1 + psi2) * term;
    s1 += add;
    if (std::abs(add) < kEps * std::abs(s1)) break;
  }
  k1 = 1.0 / x + lg * i1 - 0.25 * x * s1;
}

// Steed's continued fraction (CF2) for K_0, K_1 scaled by e^x. Valid for x >= 2.
void k01_steed_scaled(double x, double& k0s, double& k1s) {
  const double a1 = 0.25;
  double b = 2.0 * (1.0 + x);
  double d = 1.0 / b;
  double h = d, delh = d;
  double q1 = 0.0, q2 = 1.0;
  double q = a1, c = a1, a = -a1;
  double s = 1.0 + q * delh;
  for (int i = 1; i < 100000; ++i) {
    a -= 2 * i;
    c = -a * c / (i + 1.0);
    double qnew = (q1 - b * q2) / a;
    q1 = q2;
    q2 = qnew;
    q += c * qnew;
    b += 2.0;
    d = 1.0 / (b + a * d);
    delh = (b * d - 1.0) * delh;
    h += delh;
    double dels = q * delh;
    s += dels;
    if (std::abs(dels / s) < kEps) break;
  }
  h *= a1;
  k0s = std::sqrt(std::numbers::pi / (2.0 * x)) / s;
  k1s = k0s * (x + 0.5 - h) / x;
}

void k01_scaled(double x, double& k0s, double& k1s) {
  if (x <= kSeriesSwitch) {
    double k0, k1;
    k01_series(x, k0, k1);
    double e = std::exp(x);
    k0s = k0 * e;
    k1s = k1 * e;
  } else {
    k01_steed_scaled(x, k0s, k1s);
  }
}

// Scaled K_n and K_{n+1} by upward recurrence (stable for K).
void kn_pair_scaled(int n, double x, double& kn, double& kn1) {
  double km, k;
  k01_scaled(x, km, k);
  for (int j = 1; j <= n; ++j) {
    double kp = km + (2.0 * j / x) * k;
    km = k;
    k = kp;
  }
  kn = km;
  kn1 = k;
}

// I_{n+1}/I_n by modified Lentz on the CF1 fraction.
double cf1(int n, double x) {
  double f = kTiny, cc = f, dd = 0.0;
  for (int j = 1; j < 10000000; ++j) {
    double b = 2.0 * (n + j) / x;
    dd = b + dd;
    if (dd == 0.0) dd = kTiny;
    cc = b + 1.0 / cc;
    if (cc == 0.0) cc = kTiny;
    dd = 1.0 / dd;
    double delta = cc * dd;
    f *= delta;
    if (std::abs(delta - 1.0) < kEps) return f;
  }
  throw Error("IntegrationFailure", "Bessel CF1 did not converge");
}

}  // namespace

double bessel_k_scaled(int n, double x) {
  check_args(n, x);
  double kn, kn1;
  kn_pair_scaled(n, x, kn, kn1);
  return kn;
}

double bessel_k(int n, double x) {
  check_args(n, x);
  if (x <= kSeriesSwitch && n <= 1) {
    double k0, k1;
    k01_series(x, k0, k1);
    return n == 0 ? k0 : k1;
  }
  return bessel_k_scaled(n, x) * std::exp(-x);
}

double bessel_i_scaled(int n, double x) {
  check_args(n, x);
  if (x <= kSeriesSwitch) return i_series(n, x) * std::exp(-x);
  double kn, kn1;
  kn_pair_scaled(n, x, kn, kn1);
  double f = cf1(n, x);
  // Wronskian I_n K_{n+1} + I_{n+1} K_n = 1/x; the e^{±x} scalings cancel.
  return 1.0 / (x * (kn1 + f * kn));
}

double bessel_i(int n, double x) {
  check_args(n, x);
  if (x <= kSeriesSwitch) return i_series(n, x);
  double s = bessel_i_scaled(n, x);
  if (x > 700.0) {
    double lg = std::log(s) + x;
    return lg > std::log(std::numeric_limits<double>::max())
               ? std::numeric_limits<double>::infinity()
               : std::exp(lg);
  }
  return s * std::exp(x);
}

double k_next_ratio(int n, double x) {
  check_args(n, x);
  double k0s, k1s;
  k01_scaled(x, k0s, k1s);
  double r = k1s / k0s;
  for (int j = 1; j <= n; ++j) r = 1.0 / r + 2.0 * j / x;
  return r;
}

double i_next_ratio(int n, double x) {
  check_args(n, x);
  return cf1(n, x);
}

double bessel_k_ratio(int n, double x) { return n / x - k_next_ratio(n, x); }

double bessel_i_ratio(int n, double x) { return i_next_ratio(n, x) + n / x; }

}  // namespace vegspot::bessel
