#pragma once

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Sparse>

#include "vegspot/errors.hpp"
#include "vegspot/model_core.hpp"

namespace vegspot {

enum class ProfileKind { Spot, Gap, Ring, Target, Other };
std::string to_string(ProfileKind k);
ProfileKind profile_kind_from_string(const std::string& s);

struct RadialGrid {
  double rMax = 20.0;
  int n = 401;
  double h() const { return rMax / (n - 1); }
  double r(int i) const { return i * h(); }
};

// Smallest grid on [0, rMax] with at least nMin nodes and h <= delta/4.
RadialGrid make_grid(double rMax, double delta, int nMin = 401);

// Default truncation radius for a predicted interface radius.
double default_rmax(double rIPredicted);

struct RadialProfile {
  RadialGrid grid;
  std::vector<double> u, v;
  ModelParams params;
  std::vector<double> interfaces;
  double residualNorm = INFINITY;
  ProfileKind kind = ProfileKind::Other;
  bool converged = false;
  std::vector<double> residualHistory;
};

class NewtonFailure : public Error {
 public:
  NewtonFailure(const std::string& what, std::vector<double> history)
      : Error("NewtonDiverged", what), history(std::move(history)) {}
  std::vector<double> history;
};

// States alternate at each radius. Spot: vegetated core in bare ground. Gap: the
// reverse. Ring: bare core, vegetated annulus, bare outside. Target: two or more
// concentric interfaces in a vegetated background. Other with no radii is the bare
// state u = a, v = 0.
RadialProfile initial_guess(ProfileKind kind, const ModelParams& p, const std::vector<double>& radii,
                            const RadialGrid& grid);

struct NewtonOptions {
  double tol = 1e-9;
  int maxIter = 60;
  int maxHalvings = 30;
  // Fallback when Newton fails from the guess: implicit Euler toward a nearby stable state.
  bool pseudoTransient = true;
  double ptcStep = 0.05;
  double ptcMaxStep = 1e6;
  double ptcHandoff = 1e-10;
  int ptcMaxIter = 20000;
};

RadialProfile solve_profile(const RadialProfile& guess, const NewtonOptions& opt = {});

// Discrete system on interleaved unknowns z = (u_0, v_0, u_1, v_1, ...).
Eigen::VectorXd bvp_residual(const RadialGrid& g, const ModelParams& p, const Eigen::VectorXd& z);
Eigen::SparseMatrix<double> bvp_jacobian(const RadialGrid& g, const ModelParams& p,
                                         const Eigen::VectorXd& z);
double profile_residual_norm(const RadialProfile& prof);

// Inflection points of v at the vegetated/bare transitions; throws GridTooCoarse
// when a transition spans fewer than 6 nodes.
std::vector<double> find_interfaces(const RadialGrid& g, const std::vector<double>& v);
ProfileKind classify_profile(const RadialProfile& prof);

struct ContinuationOptions {
  double step = 0.005;
  double minStep = 1e-5;
  double maxStep = 0.02;
  double stopRadiusFraction = 0.6;  // stop once r_I exceeds this fraction of rMax
};

// Natural-parameter continuation in a; the returned branch starts with the input profile.
std::vector<RadialProfile> continue_in_a(const RadialProfile& start, double aTarget,
                                         const ContinuationOptions& opt = {});

// Profile CSV (r,u,v) plus a JSON sidecar next to it.
void write_profile(const std::filesystem::path& csv, const RadialProfile& prof);
RadialProfile read_profile(const std::filesystem::path& csv);

}  // namespace vegspot
