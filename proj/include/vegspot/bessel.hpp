#pragma once

namespace vegspot::bessel {

inline constexpr int kMaxOrder = 64;

// Modified Bessel functions of integer order 0..64 and real argument x > 0.
// Scaled variants return I_n(x)e^{-x} and K_n(x)e^{x}. Values that leave the
// double range come back as +inf (K at tiny x, large n) or 0 (I likewise).
double bessel_i(int n, double x);
double bessel_k(int n, double x);
double bessel_i_scaled(int n, double x);
double bessel_k_scaled(int n, double x);

// Logarithmic derivatives K_n'/K_n and I_n'/I_n, evaluated through ratios so
// they stay finite when the functions themselves under- or overflow.
double bessel_k_ratio(int n, double x);
double bessel_i_ratio(int n, double x);

// K_{n+1}(x)/K_n(x) and I_{n+1}(x)/I_n(x).
double k_next_ratio(int n, double x);
double i_next_ratio(int n, double x);

// Argument at which K_0, K_1 switch from the log-series to Steed's continued fraction.
inline constexpr double kSeriesSwitch = 2.0;

}  // namespace vegspot::bessel
