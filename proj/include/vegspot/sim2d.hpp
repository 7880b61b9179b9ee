#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <vector>

#include "vegspot/model_core.hpp"
#include "vegspot/radial_bvp.hpp"

namespace vegspot {

// Periodic n x n field on [-L/2, L/2)^2, node (i, j) at (i h - L/2, j h - L/2),
// stored row-major with index j * n + i.
struct Field2D {
  int n = 0;
  double L = 0.0;
  double t = 0.0;
  ModelParams params;
  std::vector<double> u, v;
  double h() const { return L / n; }
  double x(int i) const { return i * h() - 0.5 * L; }
};

// Optional source terms (fu, fv) at (x, y, t), added to the reaction.
using Forcing = std::function<std::array<double, 2>(double x, double y, double t)>;

struct StepOptions {
  double dt = 0.1;
  double reactionCfl = 0.2;  // substep <= reactionCfl / max |reaction Jacobian eigenvalue|
  Forcing forcing;
};

// Strang splitting: exact diffusion in the Fourier basis of the periodic isotropic
// 9-point Laplacian, explicit RK2 reaction substeps. Plans and multipliers are cached.
class Integrator {
 public:
  Integrator(int n, double L, double delta, StepOptions opt = {});
  ~Integrator();
  Integrator(const Integrator&) = delete;
  Integrator& operator=(const Integrator&) = delete;

  // Advances by whole steps of opt.dt to f.t + duration (last step shortened).
  void advance(Field2D& f, double duration);
  // Diffusion substep alone: x <- exp(tau D Lap) x with D = 1 or delta^2.
  void diffuse(std::vector<double>& x, double tau, bool slowField) const;
  const StepOptions& options() const { return opt_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  StepOptions opt_;
};

// One step of size dt.
Field2D step(const Field2D& f, double dt, const StepOptions& opt = {});

struct InterfaceDiagnostics {
  double t = 0.0;
  bool starShaped = false;
  double cx = 0.0, cy = 0.0;  // centroid of the vegetated (or bare) region
  std::vector<double> rho;   // 256 angles, empty when not star-shaped
  std::vector<double> amp;   // |rho_l| for l = 0..32, rho_0 being the mean radius
};

struct InterfaceOptions {
  double level = 0.0;  // v level set; <= 0 means half the field maximum
  int angles = 256;
  int lmax = 32;
};

InterfaceDiagnostics interface_diagnostics(const Field2D& f, const InterfaceOptions& opt = {});

struct RunOptions {
  StepOptions step;
  std::filesystem::path outDir;  // snapshots and manifest written when non-empty
  std::uint64_t seed = 0;        // recorded in the manifest
};

// Calls observer at t0 and at every multiple of snapEvery up to tEnd; returns the final field.
// Throws BlowUp if a value leaves [-1e6, 1e6] or turns non-finite.
Field2D run(const Field2D& initial, double tEnd, double snapEvery, const RunOptions& opt = {},
            const std::function<void(const Field2D&)>& observer = {});

// Radial profile placed at the domain centre with linear interpolation in r, plus
// uniform noise in [-noiseAmp, noiseAmp] on v (clipped at 0). Throws DomainTooSmall
// when L < 2.5 times the outermost interface radius.
Field2D embed_radial(const RadialProfile& prof, int n, double L, double noiseAmp, std::uint64_t seed);

Field2D homogeneous_field(const ModelParams& p, int n, double L, double u, double v);

struct GrowthFit {
  int l = 0;
  double rate = 0.0;
  double stderr_ = 0.0;
  int samples = 0;
};

// Least-squares slope of log |rho_l| over the snapshots from tMin on, up to the first one
// with a mode above linearFraction of the mean radius. Throws RegimeExceeded with fewer
// than 5 usable snapshots.
std::vector<GrowthFit> growth_rates(const std::vector<InterfaceDiagnostics>& diag,
                                    double linearFraction = 0.05, double tMin = 0.0);

void write_snapshot(const std::filesystem::path& dir, const Field2D& f);

}  // namespace vegspot
