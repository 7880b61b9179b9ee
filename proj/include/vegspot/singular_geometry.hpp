#pragma once

#include <vector>

#include "vegspot/model_core.hpp"

namespace vegspot {

enum class Direction { DesertToVeg, VegToDesert };

// Explicit tanh heteroclinic of the layer problem v'' + c v' - m v + u v^2(1-bv) = 0.
struct LayerFront {
  Direction direction = Direction::VegToDesert;
  double u = 0.0;
  double amplitude = 0.0;  // v_+(u)
  double speed = 0.0;
  double rate = 0.0;       // k in tanh(k zeta)
  double ansatzC = 0.0;    // q = C v (v - v_+)

  double v(double zeta) const { return derivative(0, zeta); }
  double q(double zeta) const { return derivative(1, zeta); }
  // Analytic derivatives of order 0..3.
  double derivative(int order, double zeta) const;
  double layer_residual(double zeta, const ModelParams& p) const;
};

LayerFront layer_front(Direction dir, double u, const ModelParams& p);

// Melnikov integral in the u direction along the stationary front at u = u_f.
double melnikov_u(Direction dir, const ModelParams& p);

// F(u) = int_{U2}^u (s - a + s v_+(s)^2) ds in closed form, and the reduced
// nonlinearity f(u) = u - a + u v_+(u)^2.
double slow_potential(double u, const ModelParams& p);
double slow_nonlinearity(double u, const ModelParams& p);
double slow_nonlinearity_du(double u, const ModelParams& p);

// E(u,p) = -p^2/2 + F(u).
double energy(double u, double pval, const ModelParams& p);

// p_{f,inf}: positive root of E(u_f, p) = 0; NaN if F(u_f) < 0.
double p_f_infinity(const ModelParams& p);

double gamma_out(double r, const ModelParams& p);
double gamma_out_slope(double r, const ModelParams& p);
double gamma_in_gap(double r, const ModelParams& p);

enum class SlowBranch { Plus, Zero };

struct ReducedSample {
  double r = 0.0, u = 0.0, p = 0.0;
};

struct ReducedTrajectory {
  SlowBranch branch = SlowBranch::Plus;
  std::vector<ReducedSample> samples;
  double pF = 0.0;
  double rF = 0.0;
};

struct ShootOptions {
  double r0 = 1e-3;
  double rCap = 1e4;
  double rtol = 1e-10;
  double atol = 1e-12;
  bool record = true;
};

// Core trajectory on M+ launched at (u_in, f(u_in) r0/2, r0), stopped at u = u_f.
// u_in is given as its offset above U2 so launches at roundoff distance stay exact.
ReducedTrajectory reduced_flow_shoot_offset(double w_in, const ModelParams& p,
                                            const ShootOptions& opt = {});
ReducedTrajectory reduced_flow_shoot(double u_in, const ModelParams& p,
                                     const ShootOptions& opt = {});

// Integrates the radial reduced flow on the given branch from (r_start, u, p) to r_end.
ReducedTrajectory reduced_flow_integrate(SlowBranch branch, double r_start, double u, double pval,
                                         double r_end, const ModelParams& p,
                                         const ShootOptions& opt = {});

// Autonomous large-r flow u' = p, p' = f(u) on M+.
ReducedTrajectory reduced_flow_infinity(double u, double pval, double span, const ModelParams& p,
                                        const ShootOptions& opt = {});

struct SingularPrediction {
  Classification kind = Classification::Boundary;
  double uStarIn = 0.0;  // spot: launch level; gap: desert core level u(0)
  double rI = 0.0;
  double pAtJump = 0.0;
  double crossingResidual = 0.0;
  double transversality = 0.0;  // slope of the core curve minus slope of the far-field curve
  double criterionMargin = 0.0; // p_{f,inf} - (a - u_f)
  bool converged = false;
  ReducedTrajectory core;       // M+ core for spots, M+ far field for gaps
};

SingularPrediction predict_interface_radius(const ModelParams& p, const ShootOptions& opt = {});

// Level u_* with E(u_*, a - u_*) = 0 selecting the singular traveling front.
double front_jump_level(const ModelParams& p);

struct TravelingFront {
  Direction direction = Direction::DesertToVeg;
  std::vector<double> xi, u, v;
  double speed = 0.0;          // c, front moves with delta*c
  double uStar = 0.0;
  double singularSpeed = 0.0;  // layer speed at u_*
  double residual = 0.0;
  int iterations = 0;
};

struct FrontOptions {
  Direction direction = Direction::DesertToVeg;
  double slowLength = 15.0;
  int interfacePoints = 64;  // nodes across |k zeta| <= 2
  double tol = 1e-9;
  int maxIter = 50;
};

TravelingFront solve_traveling_front(const ModelParams& p, const FrontOptions& opt = {});

struct SidebandResult {
  double lambda2c = 0.0;        // delta times the leading-order quotient
  double layerQuotient = 0.0;   // -int w v^2 e^{c z} v' / int e^{c z} v'^2
  double slowPlus = 0.0;        // int_{-inf}^0 u_{+,inf}'^2
  double slowZero = 0.0;        // int_0^inf u_{0,inf}'^2
  double uStar = 0.0;
  double speed = 0.0;
};

struct SidebandOptions {
  bool literalWeight = false;   // (1 - v) instead of (1 - b v)
  bool stationary = false;      // evaluate at u = u_f, c = 0
};

SidebandResult sideband_coefficient(const ModelParams& p, const SidebandOptions& opt = {});

// Layer quotient int v^2(1-bv)(-v') e^{cz} / int v'^2 e^{cz} over the vd front at level u.
double layer_quotient(double u, double c, const ModelParams& p, bool literalWeight = false);

}  // namespace vegspot
