#include "vegspot/spectral.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseLU>
#include <boost/math/tools/roots.hpp>

#include "ode2.hpp"
#include "vegspot/bessel.hpp"
#include "vegspot/errors.hpp"
#include "vegspot/parallel.hpp"

namespace vegspot {

using cd = std::complex<double>;

double essential_spectrum_bound(const ModelParams& p) { return -std::min(1.0, p.m); }

Eigen::Vector4cd far_field_symbol_eigenvalues(cd lambda, const ModelParams& p) {
  if (!(p.delta > 0.0)) throw domain_error("far-field symbol needs delta > 0");
  Eigen::Matrix4cd A = Eigen::Matrix4cd::Zero();
  A(0, 1) = 1.0;
  A(1, 0) = 1.0 + lambda;
  A(2, 3) = 1.0;
  A(3, 2) = (p.m + lambda) / (p.delta * p.delta);
  Eigen::ComplexEigenSolver<Eigen::Matrix4cd> es(A, false);
  return es.eigenvalues();
}

double far_field_hyperbolicity(const ModelParams& p, int samples) {
  const double beta = essential_spectrum_bound(p);
  const int nre = std::max(1, samples / 10), nim = std::max(1, samples / nre);
  double worst = INFINITY;
  for (int i = 0; i < nre; ++i) {
    const double re = beta + 1e-6 + 3.0 * i / nre;
    for (int j = 0; j < nim; ++j) {
      const double im = nim == 1 ? 0.0 : -3.0 + 6.0 * j / (nim - 1);
      const auto mu = far_field_symbol_eigenvalues({re, im}, p);
      for (int q = 0; q < 4; ++q) worst = std::min(worst, std::abs(mu[q].real()));
    }
  }
  return worst;
}

double ModeSpectrum::max_real() const {
  double m = -INFINITY;
  for (const auto& e : eigs) m = std::max(m, e.lambda.real());
  return m;
}

const ModeSpectrum& SpectrumResult::at(int l) const {
  for (const auto& s : modes)
    if (s.l == std::abs(l)) return s;
  throw domain_error("wavenumber " + std::to_string(l) + " not in the spectrum");
}

Eigen::SparseMatrix<double> stability_matrix(const RadialProfile& prof, int l) {
  const auto& g = prof.grid;
  const auto& p = prof.params;
  Eigen::VectorXd z(2 * g.n);
  for (int i = 0; i < g.n; ++i) {
    z[2 * i] = prof.u[i];
    z[2 * i + 1] = prof.v[i];
  }
  Eigen::SparseMatrix<double> J = bvp_jacobian(g, p, z);
  if (l == 0) return J;
  const double l2 = static_cast<double>(l) * l, d2 = p.delta * p.delta;
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(static_cast<std::size_t>(J.nonZeros()) + 2 * g.n);
  for (int c = 0; c < J.outerSize(); ++c)
    for (Eigen::SparseMatrix<double>::InnerIterator it(J, c); it; ++it)
      if (it.row() >= 2 && it.col() >= 2) t.emplace_back(it.row() - 2, it.col() - 2, it.value());
  for (int i = 1; i < g.n; ++i) {
    const double r2 = g.r(i) * g.r(i);
    t.emplace_back(2 * i - 2, 2 * i - 2, -l2 / r2);
    t.emplace_back(2 * i - 1, 2 * i - 1, -d2 * l2 / r2);
  }
  Eigen::SparseMatrix<double> A(2 * g.n - 2, 2 * g.n - 2);
  A.setFromTriplets(t.begin(), t.end());
  return A;
}

namespace {

// Inverse iteration at a fixed complex shift with Rayleigh-quotient updates.
bool polish(const Eigen::SparseMatrix<double>& A, cd& lambda, Eigen::VectorXcd& x, double tol,
            double& residual) {
  const Eigen::SparseMatrix<cd> Ac = A.cast<cd>();
  Eigen::SparseMatrix<cd> I(A.rows(), A.cols());
  I.setIdentity();
  x.normalize();
  auto res = [&]() { return (Ac * x - lambda * x).norm(); };
  residual = res();
  for (int it = 0; it < 6 && residual > tol; ++it) {
    Eigen::SparseLU<Eigen::SparseMatrix<cd>> lu;
    lu.compute(Ac - lambda * I);
    if (lu.info() != Eigen::Success) return residual <= tol;  // shift is an eigenvalue to roundoff
    for (int k = 0; k < 2; ++k) {
      Eigen::VectorXcd y = lu.solve(x);
      if (!y.allFinite() || y.norm() == 0.0) return false;
      x = y / y.norm();
    }
    lambda = x.dot(Ac * x);  // x normalized; dot conjugates the first argument
    residual = res();
  }
  return residual <= tol;
}

}  // namespace

std::vector<Eigenpair> rightmost_eigenvalues(const Eigen::SparseMatrix<double>& A,
                                             const SpectrumOptions& opt, double discardBelow) {
  const Eigen::Index N = A.rows();
  Eigen::SparseMatrix<double> I(N, N);
  I.setIdentity();
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(A - opt.shift * I);
  if (lu.info() != Eigen::Success) throw Error("EigSolverStalled", "shifted matrix is singular");

  const int m = static_cast<int>(std::min<Eigen::Index>(opt.krylov, N - 1));
  Eigen::MatrixXd V(N, m + 1);
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(m + 1, m);
  for (Eigen::Index i = 0; i < N; ++i) V(i, 0) = 1.0 + 0.1 * std::sin(0.37 * static_cast<double>(i));
  V.col(0).normalize();
  int built = m;
  for (int j = 0; j < m; ++j) {
    Eigen::VectorXd w = lu.solve(V.col(j));
    for (int pass = 0; pass < 2; ++pass) {
      for (int i = 0; i <= j; ++i) {
        const double hij = V.col(i).dot(w);
        H(i, j) += hij;
        w -= hij * V.col(i);
      }
    }
    H(j + 1, j) = w.norm();
    if (H(j + 1, j) < 1e-14 * H.col(j).norm()) {
      built = j + 1;
      break;
    }
    V.col(j + 1) = w / H(j + 1, j);
  }
  Eigen::EigenSolver<Eigen::MatrixXd> es(H.topLeftCorner(built, built));
  const Eigen::VectorXcd mu = es.eigenvalues();
  const Eigen::MatrixXcd Y = es.eigenvectors();

  struct Cand {
    cd lambda;
    int idx;
  };
  std::vector<Cand> cands;
  const double hnext = built < m ? 0.0 : H(built, built - 1);
  for (int i = 0; i < built; ++i) {
    if (std::abs(mu[i]) < 1e-300) continue;
    const double est = hnext * std::abs(Y(built - 1, i));
    if (est > 1e-4 * std::abs(mu[i])) continue;
    const cd lam = opt.shift + 1.0 / mu[i];
    if (lam.real() < discardBelow) continue;
    cands.push_back({lam, i});
  }
  std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
    if (a.lambda.real() != b.lambda.real()) return a.lambda.real() > b.lambda.real();
    return a.lambda.imag() > b.lambda.imag();
  });

  std::vector<Eigenpair> out;
  for (const auto& c : cands) {
    if (static_cast<int>(out.size()) >= opt.k) break;
    cd lam = c.lambda;
    Eigen::VectorXcd x = V.leftCols(built).cast<cd>() * Y.col(c.idx);
    double res = 0.0;
    if (!polish(A, lam, x, opt.tol, res)) continue;
    if (lam.real() < discardBelow) continue;
    bool dup = false;
    for (const auto& e : out)
      if (std::abs(e.lambda - lam) <= 1e-7 * std::max(1.0, std::abs(lam))) dup = true;
    if (dup) continue;
    Eigenpair ep{lam, res, {}};
    if (opt.keepVectors) ep.vector = x;
    out.push_back(std::move(ep));
  }
  if (out.empty() && !cands.empty())
    throw Error("EigSolverStalled", "no Ritz pair reached the residual tolerance");
  std::sort(out.begin(), out.end(), [](const Eigenpair& a, const Eigenpair& b) {
    if (a.lambda.real() != b.lambda.real()) return a.lambda.real() > b.lambda.real();
    return a.lambda.imag() > b.lambda.imag();
  });
  return out;
}

SpectrumResult direct_spectrum(const RadialProfile& prof, int lmin, int lmax,
                               const SpectrumOptions& opt) {
  if (!prof.converged) throw domain_error("spectrum needs a converged profile");
  lmin = std::abs(lmin);
  lmax = std::abs(lmax);
  if (lmin > lmax) std::swap(lmin, lmax);
  SpectrumResult res;
  res.essSpecBound = essential_spectrum_bound(prof.params);
  res.modes.resize(static_cast<std::size_t>(lmax - lmin + 1));
  parallel_for(res.modes.size(), [&](std::size_t i) {
    const int l = lmin + static_cast<int>(i);
    res.modes[i].l = l;
    res.modes[i].eigs = rightmost_eigenvalues(stability_matrix(prof, l), opt, res.essSpecBound);
  });
  return res;
}

double translation_overlap(const RadialProfile& prof, const Eigen::VectorXcd& x) {
  const auto& g = prof.grid;
  const double h = g.h();
  Eigen::VectorXd d(2 * g.n - 2);
  for (int i = 1; i < g.n; ++i) {
    const int hi = std::min(i + 1, g.n - 1);
    const double span = (hi - (i - 1)) * h;
    d[2 * i - 2] = (prof.u[hi] - prof.u[i - 1]) / span;
    d[2 * i - 1] = (prof.v[hi] - prof.v[i - 1]) / span;
  }
  return std::abs(x.dot(d.cast<cd>())) / (x.norm() * d.norm());
}

SlowBackground SlowBackground::from_trajectory(const ReducedTrajectory& tr) {
  SlowBackground bg;
  for (const auto& s : tr.samples) {
    if (!bg.r_.empty() && s.r <= bg.r_.back()) continue;
    bg.r_.push_back(s.r);
    bg.u_.push_back(s.u);
    bg.p_.push_back(s.p);
  }
  if (bg.r_.size() < 2) throw domain_error("background trajectory too short");
  return bg;
}

SlowBackground SlowBackground::from_profile(const RadialProfile& prof, double rEnd) {
  SlowBackground bg;
  const auto& g = prof.grid;
  const double h = g.h();
  for (int i = 0; i < g.n - 1 && g.r(i) <= rEnd + h; ++i) {
    bg.r_.push_back(g.r(i));
    bg.u_.push_back(prof.u[i]);
    bg.p_.push_back(i == 0 ? 0.0 : (prof.u[i + 1] - prof.u[i - 1]) / (2 * h));
  }
  if (bg.r_.size() < 2) throw domain_error("background profile too short");
  return bg;
}

double SlowBackground::u(double r) const {
  if (r <= r_.front()) return u_.front() + 0.5 * p_.front() * (r * r / r_.front() - r_.front());
  if (r >= r_.back()) return u_.back() + p_.back() * (r - r_.back());
  const auto k = static_cast<std::size_t>(std::upper_bound(r_.begin(), r_.end(), r) - r_.begin()) - 1;
  const double h = r_[k + 1] - r_[k], t = (r - r_[k]) / h;
  const double h00 = (1 + 2 * t) * (1 - t) * (1 - t), h10 = t * (1 - t) * (1 - t);
  const double h01 = t * t * (3 - 2 * t), h11 = t * t * (t - 1);
  return h00 * u_[k] + h10 * h * p_[k] + h01 * u_[k + 1] + h11 * h * p_[k + 1];
}

double SlowBackground::du(double r) const {
  if (r <= r_.front()) return p_.front() * r / r_.front();
  if (r >= r_.back()) return p_.back();
  const auto k = static_cast<std::size_t>(std::upper_bound(r_.begin(), r_.end(), r) - r_.begin()) - 1;
  const double h = r_[k + 1] - r_[k], t = (r - r_[k]) / h;
  const double d00 = 6 * t * (t - 1) / h, d10 = (1 - t) * (1 - 3 * t);
  const double d01 = -d00, d11 = t * (3 * t - 2);
  return d00 * u_[k] + d10 * p_[k] + d01 * u_[k + 1] + d11 * p_[k + 1];
}

SlowBackground core_background(double rI, const ModelParams& p) {
  const double U2 = equilibria(p).P2->u, uf = u_front(p);
  ShootOptions quiet;
  quiet.record = false;
  auto g = [&](double s) {
    return std::log(reduced_flow_shoot_offset((uf - U2) * std::exp(-s), p, quiet).rF / rI);
  };
  double lo = 1e-3, hi = 4.0;
  double glo = g(lo), ghi = g(hi);
  if (glo > 0.0) throw domain_error("radius below the smallest core trajectory");
  while (ghi < 0.0) {
    hi *= 1.5;
    if (hi > 600.0) throw Error("NoIntersection", "no core trajectory reaches u_f at this radius");
    ghi = g(hi);
  }
  std::uintmax_t iters = 200;
  auto root = boost::math::tools::toms748_solve(g, lo, hi, glo, ghi,
                                                boost::math::tools::eps_tolerance<double>(50), iters);
  const double s = 0.5 * (root.first + root.second);
  return SlowBackground::from_trajectory(reduced_flow_shoot_offset((uf - U2) * std::exp(-s), p));
}

double slow_potential_term(double u, const ModelParams& p) {
  const double v = v_plus(u, p);
  return u * v * v * v / (p.m - u * (2.0 * v - 3.0 * p.b * v * v));
}

namespace {

// Linear shot of u'' + u'/r - (l^2/r^2 + 1 + f) u = 0 in (u, u'), renormalized per chunk.
double ratio_direct(int l, const std::function<double(double)>& fplus, double rI,
                    const SlowRatioOptions& opt) {
  const double L = std::abs(l), l2 = L * L;
  auto rhs = [&](const detail::State2& y, detail::State2& dy, double r) {
    dy[0] = y[1];
    dy[1] = -y[1] / r + (l2 / (r * r) + 1.0 + fplus(r)) * y[0];
  };
  const double c = (1.0 + fplus(opt.eps)) / (4.0 * (L + 1.0));
  detail::State2 y{1.0 + c * opt.eps * opt.eps, L / opt.eps + 2.0 * c * opt.eps};
  double r = opt.eps;
  while (r < rI) {
    const double r1 = std::min(rI, r + 0.5);
    auto hit = detail::integrate_with_event(
        rhs, r, y, r1, [](double, const detail::State2&) { return 1.0; },
        [](double, const detail::State2&) {}, opt.rtol, opt.atol * 1e-6, 0.0);
    y = hit.y;
    const double s = std::max(std::abs(y[0]), std::abs(y[1]));
    y[0] /= s;
    y[1] /= s;
    r = r1;
  }
  return y[1] / y[0];
}

}  // namespace

double slow_eigenfunction_ratio(int l, const std::function<double(double)>& fplus, double rI,
                                const SlowRatioOptions& opt) {
  if (!(rI > opt.eps)) throw domain_error("rI must exceed the starting radius");
  const double L = std::abs(l);
  detail::State2 y0{};
  std::function<void(const detail::State2&, detail::State2&, double)> rhs;
  if (l == 0) {
    // y = u'/u
    y0[0] = 0.5 * (1.0 + fplus(opt.eps)) * opt.eps;
    rhs = [&](const detail::State2& y, detail::State2& dy, double r) {
      dy[0] = -y[0] * y[0] - y[0] / r + 1.0 + fplus(r);
      dy[1] = 0.0;
    };
  } else {
    // w = (r/|l|) u'/u
    y0[0] = 1.0 + (1.0 + fplus(opt.eps)) * opt.eps * opt.eps / (2.0 * L * (L + 1.0));
    rhs = [&](const detail::State2& y, detail::State2& dy, double r) {
      dy[0] = L / r * (1.0 - y[0] * y[0]) + r / L * (1.0 + fplus(r));
      dy[1] = 0.0;
    };
  }
  auto leave = [](double, const detail::State2& y) { return 10.0 - std::abs(y[0]); };
  auto hit = detail::integrate_with_event(rhs, opt.eps, y0, rI, leave,
                                          [](double, const detail::State2&) {}, opt.rtol, opt.atol,
                                          1e-12);
  if (hit.hit) return ratio_direct(l, fplus, rI, opt);
  return l == 0 ? hit.y[0] : L * hit.y[0] / rI;
}

double slow_eigenfunction_ratio(int l, const SlowBackground& bg, double rI, const ModelParams& p,
                                const SlowRatioOptions& opt) {
  return slow_eigenfunction_ratio(
      l, [&](double r) { return slow_potential_term(bg.u(r), p); }, rI, opt);
}

std::string to_string(LambdaRegime r) {
  switch (r) {
    case LambdaRegime::Formula: return "formula";
    case LambdaRegime::LargeRadius: return "large_radius";
    case LambdaRegime::SqrtDeltaScaling: return "sqrt_delta";
    default: return "large_l";
  }
}

double stationary_layer_quotient(const ModelParams& p) {
  const double closed = 2.0 / (3.0 * p.b * std::sqrt(p.m));
  const double quad = layer_quotient(u_front(p), 0.0, p);
  if (std::abs(quad - closed) > 1e-6 * closed)
    throw Error("IntegrationFailure", "layer quotient quadrature disagrees with the closed form");
  return closed;
}

double lambda1_plateau(double rI, const ModelParams& p) {
  return gamma_out(rI, p) * stationary_layer_quotient(p);
}

AsymptoticLambda lambda1_formula(int l, double rI, const ModelParams& p, double ratio) {
  if (!(rI > 0.0)) throw domain_error("rI must be positive");
  const double uf = u_front(p), vp = v_plus(uf, p);
  const double den = ratio - bessel::bessel_k_ratio(std::abs(l), rI);
  if (std::abs(den) < 1e-10) throw Error("PoleNear", "slow and far-field log-derivatives coincide");
  const double val = (gamma_out(rI, p) - uf * vp * vp / den) * stationary_layer_quotient(p);
  return {l, val, LambdaRegime::Formula};
}

AsymptoticLambda lambda1_large_radius(int l, double rI, const ModelParams& p) {
  const double uf = u_front(p), vp = v_plus(uf, p);
  const auto sb = sideband_coefficient(p, {.stationary = true});
  const double l2 = static_cast<double>(l) * l;
  const double val = (l2 - 1.0) / (rI * rI) / (uf * vp * vp) * (sb.slowPlus + sb.slowZero) *
                     stationary_layer_quotient(p);
  return {l, val, LambdaRegime::LargeRadius};
}

SqrtDeltaLambda lambda1_sqrt_delta(double lbar, double rI, const ModelParams& p) {
  if (!(lbar > 0.0)) throw domain_error("lbar must be positive");
  const double plateau = lambda1_plateau(rI, p);
  return {-lbar * lbar / (rI * rI) + plateau, plateau > 0.0 ? rI * std::sqrt(plateau) : 0.0};
}

}  // namespace vegspot
