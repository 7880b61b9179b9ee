#include "vegspot/singular_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>

#include "ode2.hpp"
#include "vegspot/bessel.hpp"
#include "vegspot/errors.hpp"

namespace vegspot {

using detail::State2;

double LayerFront::derivative(int order, double zeta) const {
  const double A = 0.5 * amplitude;
  const double x = rate * zeta;
  const double sgn = direction == Direction::VegToDesert ? -1.0 : 1.0;
  if (order == 0) {
    // A(1 -+ tanh x) written without cancellation in the tails.
    double e = std::exp(-2.0 * sgn * x);
    return std::isinf(e) ? 0.0 : 2.0 * A / (1.0 + e);
  }
  const double ch = std::cosh(x);
  const double S = std::isinf(ch) ? 0.0 : 1.0 / (ch * ch);
  const double T = std::tanh(x);
  switch (order) {
    case 1: return sgn * A * rate * S;
    case 2: return -sgn * 2.0 * A * rate * rate * S * T;
    case 3: return -sgn * 2.0 * A * rate * rate * rate * S * (S - 2.0 * T * T);
    default: throw domain_error("layer front derivative order must be 0..3");
  }
}

double LayerFront::layer_residual(double zeta, const ModelParams& p) const {
  const double vv = v(zeta);
  return derivative(2, zeta) + speed * q(zeta) - p.m * vv + u * vv * vv * (1.0 - p.b * vv);
}

LayerFront layer_front(Direction dir, double u, const ModelParams& p) {
  validate(p);
  if (!(u > u_fold(p))) throw domain_error("layer front needs u > 4bm");
  auto [vm, vp] = *v_branches(u, p);
  LayerFront f;
  f.direction = dir;
  f.u = u;
  f.amplitude = vp;
  const double root = std::sqrt(p.b * u / 2.0);
  f.rate = vp * std::sqrt(p.b * u) / (2.0 * std::sqrt(2.0));
  const double cvd = root * (vp - 2.0 * vm);
  f.speed = dir == Direction::VegToDesert ? cvd : -cvd;
  f.ansatzC = dir == Direction::VegToDesert ? root : -root;
  return f;
}

namespace {

template <class F>
double integrate_line(F f, double halfWidth) {
  using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
  double e1 = 0.0, e2 = 0.0;
  return GK::integrate(f, -halfWidth, 0.0, 20, 1e-14, &e1) +
         GK::integrate(f, 0.0, halfWidth, 20, 1e-14, &e2);
}

}  // namespace

double melnikov_u(Direction dir, const ModelParams& p) {
  const LayerFront f = layer_front(dir, u_front(p), p);
  auto integrand = [&](double z) {
    const double v = f.v(z);
    return -v * v * (1.0 - p.b * v) * std::abs(f.q(z));
  };
  return integrate_line(integrand, 60.0 / f.rate);
}

double slow_nonlinearity(double u, const ModelParams& p) {
  const double vp = v_plus(u, p);
  return u - p.a + u * vp * vp;
}

double slow_nonlinearity_du(double u, const ModelParams& p) {
  const double s = std::sqrt(1.0 - 4.0 * p.b * p.m / u);
  if (s == 0.0) return std::numeric_limits<double>::infinity();
  const double vp = (1.0 + s) / (2.0 * p.b);
  const double dvp = p.m / (u * u * s);
  return 1.0 + vp * vp + 2.0 * u * vp * dvp;
}

namespace {

// Antiderivative of u - a + u v_+(u)^2.
double slow_antiderivative(double u, const ModelParams& p) {
  const double c = 2.0 * p.m * p.b;
  const double w = u - c;
  const double rt = std::sqrt(std::max(0.0, w * w - c * c));
  const double S = 0.5 * w * rt - 0.5 * c * c * std::log(w + rt);
  return 0.5 * u * u - p.a * u + (0.5 * u * u - c * u + S) / (2.0 * p.b * p.b);
}

double U2_of(const ModelParams& p) {
  const auto eq = equilibria(p);
  if (!eq.P2) throw domain_error("no vegetated equilibrium P2");
  return eq.P2->u;
}

}  // namespace

double slow_potential(double u, const ModelParams& p) {
  if (u < u_fold(p)) throw domain_error("slow potential below fold");
  return slow_antiderivative(u, p) - slow_antiderivative(U2_of(p), p);
}

double energy(double u, double pval, const ModelParams& p) {
  return -0.5 * pval * pval + slow_potential(u, p);
}

double p_f_infinity(const ModelParams& p) {
  const double F = slow_potential(u_front(p), p);
  return F >= 0.0 ? std::sqrt(2.0 * F) : std::numeric_limits<double>::quiet_NaN();
}

double gamma_out(double r, const ModelParams& p) {
  if (!(r > 0.0)) throw domain_error("gamma_out needs r > 0");
  return (p.a - u_front(p)) * bessel::k_next_ratio(0, r);
}

double gamma_out_slope(double r, const ModelParams& p) {
  const double rho = bessel::k_next_ratio(0, r);
  return (p.a - u_front(p)) * (-1.0 - rho / r + rho * rho);
}

double gamma_in_gap(double r, const ModelParams& p) {
  if (!(r > 0.0)) throw domain_error("gamma_in_gap needs r > 0");
  return (u_front(p) - p.a) * bessel::i_next_ratio(0, r);
}

namespace {

// f(U2 + w) evaluated without losing the offset w to roundoff near U2.
struct OffsetNonlinearity {
  const ModelParams& p;
  double U2, kappa, f2;
  explicit OffsetNonlinearity(const ModelParams& prm) : p(prm) {
    U2 = U2_of(p);
    kappa = slow_nonlinearity_du(U2, p);
    const double h = 1e-4;
    f2 = (slow_nonlinearity_du(U2 + h, p) - slow_nonlinearity_du(U2 - h, p)) / (2.0 * h);
  }
  double operator()(double w) const {
    if (std::abs(w) < 1e-5) return kappa * w + 0.5 * f2 * w * w;
    const double u = U2 + w;
    if (u < u_fold(p)) throw Error("IntegrationFailure", "trajectory crossed the fold");
    return slow_nonlinearity(u, p);
  }
};

void push_sample(ReducedTrajectory& tr, bool record, double r, double u, double pv) {
  if (record) tr.samples.push_back({r, u, pv});
}

}  // namespace

ReducedTrajectory reduced_flow_shoot_offset(double w_in, const ModelParams& p,
                                            const ShootOptions& opt) {
  validate(p);
  const OffsetNonlinearity f(p);
  const double uf = u_front(p);
  const double wf = uf - f.U2;
  if (!(w_in > 0.0)) throw Error("NoCrossing", "launch level at or below U2: u stalls");
  if (w_in > wf) throw domain_error("launch level above u_f");
  ReducedTrajectory tr;
  tr.branch = SlowBranch::Plus;
  const double r0 = opt.r0;
  State2 y0{w_in, 0.5 * f(w_in) * r0};
  if (w_in == wf) {
    push_sample(tr, opt.record, r0, uf, y0[1]);
    tr.pF = y0[1];
    tr.rF = r0;
    return tr;
  }
  auto rhs = [&](const State2& y, State2& dy, double r) {
    dy[0] = y[1];
    dy[1] = -y[1] / r + f(y[0]);
  };
  auto event = [&](double, const State2& y) { return y[0] - wf; };
  auto obs = [&](double r, const State2& y) { push_sample(tr, opt.record, r, f.U2 + y[0], y[1]); };
  auto hit = detail::integrate_with_event(rhs, r0, y0, opt.rCap, event, obs, opt.rtol, opt.atol,
                                          1e-12);
  if (hit.hit) {
    tr.pF = hit.y[1];
    tr.rF = hit.t;
  } else {
    // Shoot time diverges as u_in -> U2; fall back to the E = 0 asymptote.
    tr.pF = p_f_infinity(p);
    tr.rF = std::numeric_limits<double>::infinity();
  }
  return tr;
}

ReducedTrajectory reduced_flow_shoot(double u_in, const ModelParams& p, const ShootOptions& opt) {
  return reduced_flow_shoot_offset(u_in - U2_of(p), p, opt);
}

ReducedTrajectory reduced_flow_integrate(SlowBranch branch, double r_start, double u, double pval,
                                         double r_end, const ModelParams& p,
                                         const ShootOptions& opt) {
  validate(p);
  if (!(r_start > 0.0) || !(r_end > 0.0)) throw domain_error("radii must be positive");
  ReducedTrajectory tr;
  tr.branch = branch;
  auto rhs = [&](const State2& y, State2& dy, double r) {
    dy[0] = y[1];
    const double src = branch == SlowBranch::Zero ? y[0] - p.a : slow_nonlinearity(y[0], p);
    dy[1] = -y[1] / r + src;
  };
  auto event = [](double, const State2&) { return 1.0; };
  auto obs = [&](double r, const State2& y) { push_sample(tr, opt.record, r, y[0], y[1]); };
  auto end = detail::integrate_with_event(rhs, r_start, State2{u, pval}, r_end, event, obs,
                                          opt.rtol, opt.atol, 1e-12);
  tr.rF = end.t;
  tr.pF = end.y[1];
  return tr;
}

ReducedTrajectory reduced_flow_infinity(double u, double pval, double span, const ModelParams& p,
                                        const ShootOptions& opt) {
  validate(p);
  ReducedTrajectory tr;
  tr.branch = SlowBranch::Plus;
  auto rhs = [&](const State2& y, State2& dy, double) {
    dy[0] = y[1];
    dy[1] = slow_nonlinearity(y[0], p);
  };
  auto event = [](double, const State2&) { return 1.0; };
  auto obs = [&](double x, const State2& y) { push_sample(tr, opt.record, x, y[0], y[1]); };
  auto end = detail::integrate_with_event(rhs, 0.0, State2{u, pval}, span, event, obs, opt.rtol,
                                          opt.atol, 1e-12);
  tr.rF = end.t;
  tr.pF = end.y[1];
  return tr;
}

namespace {

using boost::math::tools::eps_tolerance;
using boost::math::tools::toms748_solve;

SingularPrediction predict_spot(const ModelParams& p, const ShootOptions& opt) {
  SingularPrediction sp;
  sp.kind = Classification::Spot;
  const double U2 = U2_of(p);
  const double wf = u_front(p) - U2;
  sp.criterionMargin = p_f_infinity(p) - (p.a - u_front(p));
  if (!(sp.criterionMargin > 0.0))
    throw Error("NoIntersection", "core curve does not reach Gamma_out (gap side)");
  ShootOptions quiet = opt;
  quiet.record = false;
  // u_in = U2 + (u_f - U2) e^{-s}; s -> infinity approaches U2.
  auto shoot = [&](double s) { return reduced_flow_shoot_offset(wf * std::exp(-s), p, quiet); };
  auto g = [&](double s) {
    auto tr = shoot(s);
    if (std::isinf(tr.rF)) return tr.pF - (p.a - u_front(p));
    return tr.pF - gamma_out(tr.rF, p);
  };
  double lo = 0.0, glo = g(lo);
  double hi = 8.0, ghi = g(hi);
  while (ghi <= 0.0) {
    lo = hi;
    glo = ghi;
    hi *= 1.5;
    if (hi > 650.0) throw Error("NoIntersection", "no crossing with Gamma_out before r cap");
    ghi = g(hi);
  }
  if (glo > 0.0) throw Error("NoIntersection", "core curve starts above Gamma_out");
  std::uintmax_t iters = 200;
  auto root = toms748_solve(g, lo, hi, glo, ghi, eps_tolerance<double>(50), iters);
  const double s = 0.5 * (root.first + root.second);
  sp.core = reduced_flow_shoot_offset(wf * std::exp(-s), p, opt);
  sp.rI = sp.core.rF;
  sp.pAtJump = sp.core.pF;
  sp.uStarIn = U2 + wf * std::exp(-s);
  sp.crossingResidual = std::isinf(sp.rI) ? sp.criterionMargin : sp.pAtJump - gamma_out(sp.rI, p);
  sp.converged = std::isfinite(sp.rI) && std::abs(sp.crossingResidual) <= 1e-8;
  if (std::isfinite(sp.rI)) {
    const double ds = 1e-4;
    auto a1 = shoot(s - ds), a2 = shoot(s + ds);
    sp.transversality = (a2.pF - a1.pF) / (a2.rF - a1.rF) - gamma_out_slope(sp.rI, p);
  }
  return sp;
}

struct FarHit {
  bool hit = false;
  double r = 0.0;
  double pval = 0.0;
};

// Backward shot on M+ from R with the decaying K_0 far field of amplitude du above U2.
FarHit far_field_shot(double du, double R, const OffsetNonlinearity& f, double wf,
                      const ShootOptions& opt, ReducedTrajectory* rec) {
  const double k = std::sqrt(f.kappa);
  State2 y0{du, -du * k * bessel::k_next_ratio(0, k * R)};
  auto rhs = [&](const State2& y, State2& dy, double r) {
    dy[0] = y[1];
    dy[1] = -y[1] / r + f(y[0]);
  };
  auto event = [&](double, const State2& y) { return y[0] - wf; };
  auto obs = [&](double r, const State2& y) {
    if (rec) rec->samples.push_back({r, f.U2 + y[0], y[1]});
  };
  auto h = detail::integrate_with_event(rhs, R, y0, opt.r0, event, obs, opt.rtol, opt.atol, 1e-12);
  return {h.hit, h.hit ? h.t : 0.0, h.hit ? h.y[1] : 0.0};
}

constexpr double kFarLength = 12.0;

// Far-field p at u = u_f for a jump placed at rI.
double far_p_at(double rI, const OffsetNonlinearity& f, double wf, const ShootOptions& opt,
                ReducedTrajectory* rec) {
  const double R = rI + kFarLength;
  auto hitr = [&](double s) {
    auto h = far_field_shot(wf * std::exp(-s), R, f, wf, opt, nullptr);
    return (h.hit ? h.r : 0.0) - rI;
  };
  double lo = 1e-6, glo = hitr(lo);
  double hi = 40.0, ghi = hitr(hi);
  while (ghi >= 0.0) {
    hi *= 1.5;
    if (hi > 600.0) throw Error("NoIntersection", "far-field shot never reaches r_I");
    ghi = hitr(hi);
  }
  if (glo <= 0.0) throw Error("NoIntersection", "far-field bracket failed");
  std::uintmax_t iters = 200;
  auto root = toms748_solve(hitr, lo, hi, glo, ghi, eps_tolerance<double>(50), iters);
  const double s = 0.5 * (root.first + root.second);
  if (rec) rec->samples.clear();
  auto h = far_field_shot(wf * std::exp(-s), R, f, wf, opt, rec);
  return h.pval;
}

SingularPrediction predict_gap(const ModelParams& p, const ShootOptions& opt) {
  SingularPrediction sp;
  sp.kind = Classification::Gap;
  const OffsetNonlinearity f(p);
  const double wf = u_front(p) - f.U2;
  sp.criterionMargin = p_f_infinity(p) - (p.a - u_front(p));
  if (!(sp.criterionMargin < 0.0))
    throw Error("NoIntersection", "far-field curve does not meet the gap Gamma_in (spot side)");
  ShootOptions quiet = opt;
  quiet.record = false;
  auto G = [&](double r) { return gamma_in_gap(r, p) - far_p_at(r, f, wf, quiet, nullptr); };
  double lo = 0.05, glo = G(lo);
  double hi = lo, ghi = glo;
  bool found = false;
  while (hi < 400.0) {
    hi = lo * 1.25 + 0.05;
    ghi = G(hi);
    if ((glo > 0.0) != (ghi > 0.0)) {
      found = true;
      break;
    }
    lo = hi;
    glo = ghi;
  }
  if (!found) throw Error("NoIntersection", "gap curves do not cross");
  std::uintmax_t iters = 200;
  auto root = toms748_solve(G, lo, hi, glo, ghi, eps_tolerance<double>(48), iters);
  sp.rI = 0.5 * (root.first + root.second);
  sp.core.branch = SlowBranch::Plus;
  sp.pAtJump = far_p_at(sp.rI, f, wf, opt, opt.record ? &sp.core : nullptr);
  std::reverse(sp.core.samples.begin(), sp.core.samples.end());
  sp.core.rF = sp.rI;
  sp.core.pF = sp.pAtJump;
  sp.crossingResidual = gamma_in_gap(sp.rI, p) - sp.pAtJump;
  sp.converged = std::abs(sp.crossingResidual) <= 1e-8;
  // Desert core u = a + (u_f - a) I_0(r)/I_0(r_I).
  sp.uStarIn = p.a + (u_front(p) - p.a) / bessel::bessel_i(0, sp.rI);
  const double h = 1e-4;
  const double rho = bessel::i_next_ratio(0, sp.rI);
  const double slope_in = (u_front(p) - p.a) * (1.0 - rho / sp.rI - rho * rho);
  const double slope_far =
      (far_p_at(sp.rI + h, f, wf, quiet, nullptr) - far_p_at(sp.rI - h, f, wf, quiet, nullptr)) /
      (2.0 * h);
  sp.transversality = slope_in - slope_far;
  return sp;
}

}  // namespace

SingularPrediction predict_interface_radius(const ModelParams& p, const ShootOptions& opt) {
  const auto crit = spot_gap_criterion(p);
  switch (crit.classification) {
    case Classification::Spot: return predict_spot(p, opt);
    case Classification::Gap: return predict_gap(p, opt);
    case Classification::Boundary: break;
  }
  throw Error("NoIntersection", "parameters on the spot/gap boundary: radius diverges");
}

}  // namespace vegspot
