#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>

#include "vegspot/errors.hpp"
#include "vegspot/singular_geometry.hpp"

namespace vegspot {

double front_jump_level(const ModelParams& p) {
  const auto eq = equilibria(p);
  if (!eq.P2 || eq.P2->u <= u_fold(p)) throw domain_error("P2 not on the upper branch");
  const double U2 = eq.P2->u;
  auto H = [&](double u) { return slow_potential(u, p) - 0.5 * (p.a - u) * (p.a - u); };
  double lo = U2, hi = p.a;
  double hlo = H(lo), hhi = H(hi);
  if (!(hlo < 0.0 && hhi > 0.0)) throw Error("NoIntersection", "no front jump level in (U2, a)");
  std::uintmax_t iters = 200;
  auto r = boost::math::tools::toms748_solve(H, lo, hi, hlo, hhi,
                                             boost::math::tools::eps_tolerance<double>(52), iters);
  return 0.5 * (r.first + r.second);
}

TravelingFront solve_traveling_front(const ModelParams& p, const FrontOptions& opt) {
  validate(p);
  if (!(p.delta > 0.0)) throw domain_error("traveling front needs delta > 0");
  if (opt.interfacePoints < 40) throw domain_error("interface must span at least 40 nodes");
  const auto eq = equilibria(p);
  if (!eq.P2 || eq.P2->u <= u_fold(p)) throw domain_error("bistability requires P2 on M+");
  const double a = p.a, b = p.b, m = p.m, d = p.delta;
  const double U2 = eq.P2->u;
  const double us = front_jump_level(p);
  const LayerFront lf = layer_front(opt.direction, us, p);

  TravelingFront tf;
  tf.direction = opt.direction;
  tf.uStar = us;
  tf.singularSpeed = lf.speed;

  const double L = opt.slowLength + 40.0 * d / std::sqrt(m);
  const double hTarget = 4.0 * d / (lf.rate * opt.interfacePoints);
  const int half = static_cast<int>(std::ceil(L / hTarget));
  const int N = 2 * half + 1;
  const double h = L / half;
  const int mid = half;
  tf.xi.resize(N);
  for (int i = 0; i < N; ++i) tf.xi[i] = (i - half) * h;

  // Singular-limit guess: slow tails glued at xi = 0 by the layer front.
  const double kappa = std::sqrt(slow_nonlinearity_du(U2, p));
  const double orient = opt.direction == Direction::VegToDesert ? 1.0 : -1.0;
  std::vector<double> z(2 * N + 1);
  for (int i = 0; i < N; ++i) {
    const double x = orient * tf.xi[i];  // x > 0 on the desert side
    z[2 * i] = x > 0.0 ? a - (a - us) * std::exp(-x) : U2 + (us - U2) * std::exp(kappa * x);
    z[2 * i + 1] = lf.v(tf.xi[i] / d);
  }
  z[2 * N] = lf.speed;
  const double target = 0.5 * lf.amplitude;

  auto residual = [&](const std::vector<double>& y, std::vector<double>& R) {
    R.assign(2 * N + 1, 0.0);
    const double c = y[2 * N];
    for (int i = 0; i < N; ++i) {
      const double u = y[2 * i], v = y[2 * i + 1];
      double uxx, vxx, ux, vx;
      if (i == 0 || i == N - 1) {
        const int j = i == 0 ? 1 : N - 2;
        uxx = 2.0 * (y[2 * j] - u) / (h * h);
        vxx = 2.0 * (y[2 * j + 1] - v) / (h * h);
        ux = vx = 0.0;
      } else {
        uxx = (y[2 * i + 2] - 2.0 * u + y[2 * i - 2]) / (h * h);
        vxx = (y[2 * i + 3] - 2.0 * v + y[2 * i - 1]) / (h * h);
        ux = (y[2 * i + 2] - y[2 * i - 2]) / (2.0 * h);
        vx = (y[2 * i + 3] - y[2 * i - 1]) / (2.0 * h);
      }
      R[2 * i] = uxx + d * c * ux + a - u - u * v * v;
      R[2 * i + 1] = d * d * vxx + d * c * vx - m * v + u * v * v * (1.0 - b * v);
    }
    R[2 * N] = y[2 * mid + 1] - target;
  };

  auto jacobian = [&](const std::vector<double>& y) {
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(static_cast<std::size_t>(14 * N));
    const double c = y[2 * N];
    const double ih2 = 1.0 / (h * h), i2h = 1.0 / (2.0 * h);
    for (int i = 0; i < N; ++i) {
      const double u = y[2 * i], v = y[2 * i + 1];
      const int ru = 2 * i, rv = 2 * i + 1;
      if (i == 0 || i == N - 1) {
        const int j = i == 0 ? 1 : N - 2;
        t.emplace_back(ru, 2 * i, -2.0 * ih2);
        t.emplace_back(ru, 2 * j, 2.0 * ih2);
        t.emplace_back(rv, 2 * i + 1, -2.0 * d * d * ih2);
        t.emplace_back(rv, 2 * j + 1, 2.0 * d * d * ih2);
      } else {
        t.emplace_back(ru, 2 * i, -2.0 * ih2);
        t.emplace_back(ru, 2 * i + 2, ih2 + d * c * i2h);
        t.emplace_back(ru, 2 * i - 2, ih2 - d * c * i2h);
        t.emplace_back(rv, 2 * i + 1, -2.0 * d * d * ih2);
        t.emplace_back(rv, 2 * i + 3, d * d * ih2 + d * c * i2h);
        t.emplace_back(rv, 2 * i - 1, d * d * ih2 - d * c * i2h);
        t.emplace_back(ru, 2 * N, d * (y[2 * i + 2] - y[2 * i - 2]) * i2h);
        t.emplace_back(rv, 2 * N, d * (y[2 * i + 3] - y[2 * i - 1]) * i2h);
      }
      t.emplace_back(ru, 2 * i, -1.0 - v * v);
      t.emplace_back(ru, 2 * i + 1, -2.0 * u * v);
      t.emplace_back(rv, 2 * i, v * v * (1.0 - b * v));
      t.emplace_back(rv, 2 * i + 1, -m + u * (2.0 * v - 3.0 * b * v * v));
    }
    t.emplace_back(2 * N, 2 * mid + 1, 1.0);
    Eigen::SparseMatrix<double> J(2 * N + 1, 2 * N + 1);
    J.setFromTriplets(t.begin(), t.end());
    return J;
  };

  auto inf_norm = [](const std::vector<double>& r) {
    double s = 0.0;
    for (double x : r) s = std::max(s, std::abs(x));
    return s;
  };

  std::vector<double> R, Rtrial, trial;
  residual(z, R);
  double nr = inf_norm(R);
  int it = 0;
  for (; it < opt.maxIter && nr > opt.tol; ++it) {
    auto J = jacobian(z);
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(J);
    if (lu.info() != Eigen::Success) throw Error("NewtonDiverged", "singular front Jacobian");
    Eigen::Map<Eigen::VectorXd> rv(R.data(), static_cast<Eigen::Index>(R.size()));
    Eigen::VectorXd dz = lu.solve(rv);
    double lambda = 1.0;
    for (int k = 0; k < 30; ++k) {
      trial = z;
      for (std::size_t q = 0; q < z.size(); ++q) trial[q] -= lambda * dz[static_cast<Eigen::Index>(q)];
      residual(trial, Rtrial);
      const double nt = inf_norm(Rtrial);
      if (std::isfinite(nt) && nt < 10.0 * nr) {
        z.swap(trial);
        R.swap(Rtrial);
        nr = nt;
        break;
      }
      lambda *= 0.5;
      if (k == 29) throw Error("NewtonDiverged", "line search failed, residual " + std::to_string(nr));
    }
  }
  if (!(nr <= opt.tol))
    throw Error("NewtonDiverged", "front residual " + std::to_string(nr) +
                                      "; re-seed from the singular limit");
  tf.iterations = it;
  tf.residual = nr;
  tf.speed = z[2 * N];
  tf.u.resize(N);
  tf.v.resize(N);
  for (int i = 0; i < N; ++i) {
    tf.u[i] = z[2 * i];
    tf.v[i] = z[2 * i + 1];
  }
  return tf;
}

double layer_quotient(double u, double c, const ModelParams& p, bool literalWeight) {
  const LayerFront f = layer_front(Direction::VegToDesert, u, p);
  const double w = literalWeight ? 1.0 : p.b;
  using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
  const double X = 60.0 / f.rate;
  auto num = [&](double z) {
    const double v = f.v(z);
    return v * v * (1.0 - w * v) * (-f.q(z)) * std::exp(c * z);
  };
  auto den = [&](double z) {
    const double q = f.q(z);
    return q * q * std::exp(c * z);
  };
  double e = 0.0;
  const double N = GK::integrate(num, -X, 0.0, 20, 1e-14, &e) + GK::integrate(num, 0.0, X, 20, 1e-14, &e);
  const double D = GK::integrate(den, -X, 0.0, 20, 1e-14, &e) + GK::integrate(den, 0.0, X, 20, 1e-14, &e);
  return N / D;
}

SidebandResult sideband_coefficient(const ModelParams& p, const SidebandOptions& opt) {
  validate(p);
  SidebandResult r;
  r.uStar = opt.stationary ? u_front(p) : front_jump_level(p);
  const LayerFront f = layer_front(Direction::VegToDesert, r.uStar, p);
  r.speed = opt.stationary ? 0.0 : f.speed;
  r.layerQuotient = layer_quotient(r.uStar, r.speed, p, opt.literalWeight);
  const double U2 = equilibria(p).P2->u;
  // Along W^u(U2), p = sqrt(2F(u)) and u increases, so int u'^2 dxi = int p du.
  auto pu = [&](double u) { return std::sqrt(std::max(0.0, 2.0 * slow_potential(u, p))); };
  double e = 0.0;
  r.slowPlus = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(pu, U2, r.uStar, 15,
                                                                             1e-10, &e);
  r.slowZero = 0.5 * (p.a - r.uStar) * (p.a - r.uStar);
  const double vp = f.amplitude;
  r.lambda2c = p.delta * r.layerQuotient / (r.uStar * vp * vp) * (r.slowPlus + r.slowZero);
  return r;
}

}  // namespace vegspot
