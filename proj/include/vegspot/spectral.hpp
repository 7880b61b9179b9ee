#pragma once

#include <complex>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "vegspot/radial_bvp.hpp"
#include "vegspot/singular_geometry.hpp"

namespace vegspot {

// -min(1, m): essential spectrum of the bare far field lies to the left.
double essential_spectrum_bound(const ModelParams& p);

// Smallest |Re| over the eigenvalues of the 4x4 far-field symbol, minimized over
// `samples` values of lambda with Re lambda > bound + 1e-6. Positive means hyperbolic.
double far_field_hyperbolicity(const ModelParams& p, int samples = 200);
Eigen::Vector4cd far_field_symbol_eigenvalues(std::complex<double> lambda, const ModelParams& p);

struct Eigenpair {
  std::complex<double> lambda;
  double residual = 0.0;  // ||A x - lambda x|| / ||x||
  Eigen::VectorXcd vector;  // empty unless requested
};

struct ModeSpectrum {
  int l = 0;
  std::vector<Eigenpair> eigs;  // sorted by decreasing real part
  double max_real() const;
};

struct SpectrumResult {
  std::vector<ModeSpectrum> modes;  // |l| ascending
  double essSpecBound = 0.0;
  // Mirrored lookup; throws if |l| was not computed.
  const ModeSpectrum& at(int l) const;
};

struct SpectrumOptions {
  int k = 6;
  double shift = 0.05;
  int krylov = 60;
  double tol = 1e-8;
  bool keepVectors = false;
};

// Linearization about the profile for angular wavenumber l, on the unknowns
// (u_i, v_i) interleaved; node 0 is dropped (Dirichlet) for l != 0.
Eigen::SparseMatrix<double> stability_matrix(const RadialProfile& prof, int l);

// Rightmost eigenvalues of a sparse real matrix by shift-invert Arnoldi with
// inverse-iteration polishing. Eigenvalues left of `discardBelow` are dropped.
std::vector<Eigenpair> rightmost_eigenvalues(const Eigen::SparseMatrix<double>& A,
                                             const SpectrumOptions& opt, double discardBelow);

// |l| in [lmin, lmax]; per-l solves run in parallel.
SpectrumResult direct_spectrum(const RadialProfile& prof, int lmin, int lmax,
                               const SpectrumOptions& opt = {});

// Normalized overlap of an eigenvector of the l = 1 problem with (u', v') of the profile.
double translation_overlap(const RadialProfile& prof, const Eigen::VectorXcd& x);

// Slow background u_+(r) on the vegetated core, with r, u, u' samples and cubic
// Hermite interpolation.
class SlowBackground {
 public:
  static SlowBackground from_trajectory(const ReducedTrajectory& tr);
  static SlowBackground from_profile(const RadialProfile& prof, double rEnd);
  double u(double r) const;
  double du(double r) const;
  double r_end() const { return r_.back(); }

 private:
  std::vector<double> r_, u_, p_;
};

// Core solution on M+ reaching u_f exactly at r = rI.
SlowBackground core_background(double rI, const ModelParams& p);

// f_+ = d/du (u v_+(u)^2), the potential of the slow eigenvalue problem on M+.
double slow_potential_term(double u, const ModelParams& p);

struct SlowRatioOptions {
  double eps = 1e-4;
  double rtol = 1e-11;
  double atol = 1e-13;
};

// (u*_l)'(rI) / u*_l(rI) for the solution of u'' + u'/r - l^2 u / r^2 - (1 + f_+(r)) u = 0
// regular at r = 0.
double slow_eigenfunction_ratio(int l, const std::function<double(double)>& fplus, double rI,
                                const SlowRatioOptions& opt = {});
double slow_eigenfunction_ratio(int l, const SlowBackground& bg, double rI, const ModelParams& p,
                                const SlowRatioOptions& opt = {});

enum class LambdaRegime { Formula, LargeRadius, SqrtDeltaScaling, LargeL };
std::string to_string(LambdaRegime r);

struct AsymptoticLambda {
  int l = 0;
  double lambda1 = 0.0;  // lambda ~ delta * lambda1
  LambdaRegime regime = LambdaRegime::Formula;
};

// Closed-form layer quotient 2/(3 b sqrt m) of the stationary front.
double stationary_layer_quotient(const ModelParams& p);

// (a - u_f) K_1(rI)/K_0(rI) times the layer quotient: the large-l limit of lambda_1.
double lambda1_plateau(double rI, const ModelParams& p);

AsymptoticLambda lambda1_formula(int l, double rI, const ModelParams& p, double ratio);
AsymptoticLambda lambda1_large_radius(int l, double rI, const ModelParams& p);

struct SqrtDeltaLambda {
  double lambda1 = 0.0;
  double criticalLbar = 0.0;  // where lambda1 vanishes
};
SqrtDeltaLambda lambda1_sqrt_delta(double lbar, double rI, const ModelParams& p);

}  // namespace vegspot
