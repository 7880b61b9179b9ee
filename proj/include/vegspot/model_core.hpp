#pragma once

#include <optional>
#include <string>
#include <utility>

namespace vegspot {

struct ModelParams {
  double a = 0.0;      // rainfall
  double b = 0.0;      // inverse carrying capacity
  double m = 0.0;      // mortality
  double delta = 0.0;  // diffusion ratio; 0 is the singular limit
};

// Throws DomainError unless a, b, m > 0, delta >= 0 and all finite.
void validate(const ModelParams& p);

struct UV {
  double u = 0.0;
  double v = 0.0;
};

struct EquilibriumSet {
  UV P0;
  std::optional<UV> P1, P2;
  bool existsVegetated = false;
};

EquilibriumSet equilibria(const ModelParams& p);

// Threshold on a/m above which vegetated equilibria exist: 2(b + sqrt(1+b^2)).
double vegetated_threshold(double b);

// Roots v_- <= v_+ of u b v^2 - u v + m = 0; absent for u < 4bm.
std::optional<std::pair<double, double>> v_branches(double u, const ModelParams& p);

// v_+(u); throws DomainError for u < 4bm.
double v_plus(double u, const ModelParams& p);
double v_minus(double u, const ModelParams& p);

double u_fold(const ModelParams& p);
double u_front(const ModelParams& p);

enum class Classification { Spot, Gap, Boundary };
std::string to_string(Classification c);

struct CriterionReport {
  bool restrictionSatisfied = false;
  double U2 = 0.0;
  double lhsIntegral = 0.0;       // adaptive quadrature of the u v_+^2 integral
  double lhsAntiderivative = 0.0; // same integral recovered from the closed form
  double rhs = 0.0;               // (a - U2)^2 / 2
  double closedFormMargin = 0.0;  // closed-form left minus right side; equals (lhs - rhs)/m^2
  Classification classification = Classification::Boundary;
};

inline constexpr double kBoundaryTol = 1e-10;

// Parameter window max{9b/2, 4b+1/b} < a/m < 9b/2 + 2/b.
bool restriction_satisfied(const ModelParams& p);
std::pair<double, double> admissible_a_window(double b, double m);

// Throws RestrictionViolated outside the window.
CriterionReport spot_gap_criterion(const ModelParams& p);

// Value of a separating spots from gaps at fixed (b, m); throws NoIntersection
// if the margin does not change sign inside the window.
double boundary_a(double b, double m, double tol = 1e-12);

struct Reaction {
  double fu = 0.0;
  double fv = 0.0;
};

struct ReactionJacobian {
  double uu = 0.0, uv = 0.0, vu = 0.0, vv = 0.0;
};

Reaction reaction(double u, double v, const ModelParams& p);
ReactionJacobian reaction_jacobian(double u, double v, const ModelParams& p);

}  // namespace vegspot
