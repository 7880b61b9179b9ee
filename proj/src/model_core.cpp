#include "vegspot/model_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "vegspot/errors.hpp"

namespace vegspot {

void validate(const ModelParams& p) {
  auto ok = [](double x) { return std::isfinite(x) && x > 0.0; };
  if (!ok(p.a) || !ok(p.b) || !ok(p.m))
    throw domain_error("a, b, m must be positive and finite");
  if (!std::isfinite(p.delta) || p.delta < 0.0) throw domain_error("delta must be >= 0");
  const double ratio = p.a / p.m;
  if (!std::isfinite(ratio) || ratio == 0.0) throw domain_error("a/m not representable");
}

double vegetated_threshold(double b) { return 2.0 * (b + std::sqrt(1.0 + b * b)); }

EquilibriumSet equilibria(const ModelParams& p) {
  validate(p);
  EquilibriumSet e;
  e.P0 = {p.a, 0.0};
  const double A = p.a / p.m;
  double disc = A * A - 4.0 * (1.0 + A * p.b);
  // Snap roundoff at the degenerate threshold so V1 = V2 there.
  if (std::abs(disc) <= 64.0 * std::numeric_limits<double>::epsilon() * A * A) disc = 0.0;
  if (disc < 0.0) return e;
  e.existsVegetated = true;
  const double den = 2.0 * (1.0 + A * p.b);
  const double sq = std::sqrt(disc);
  // Stable pair: V1 V2 = 1/(1+Ab).
  const double v2 = (A + sq) / den;
  const double v1 = 1.0 / ((1.0 + A * p.b) * v2);
  e.P1 = UV{p.a / (1.0 + v1 * v1), v1};
  e.P2 = UV{p.a / (1.0 + v2 * v2), v2};
  return e;
}

std::optional<std::pair<double, double>> v_branches(double u, const ModelParams& p) {
  if (!(u > 0.0)) throw domain_error("v_branches needs u > 0");
  const double s = 1.0 - 4.0 * p.b * p.m / u;
  if (s < 0.0) return std::nullopt;
  const double r = std::sqrt(s);
  const double vp = (1.0 + r) / (2.0 * p.b);
  // v_- v_+ = m/(u b); avoids cancellation in 1 - r.
  const double vm = p.m / (u * p.b * vp);
  return std::make_pair(vm, vp);
}

double v_plus(double u, const ModelParams& p) {
  auto br = v_branches(u, p);
  if (!br) throw domain_error("u below fold, v_+ undefined");
  return br->second;
}

double v_minus(double u, const ModelParams& p) {
  auto br = v_branches(u, p);
  if (!br) throw domain_error("u below fold, v_- undefined");
  return br->first;
}

double u_fold(const ModelParams& p) { return 4.0 * p.b * p.m; }
double u_front(const ModelParams& p) { return 4.5 * p.b * p.m; }

std::string to_string(Classification c) {
  switch (c) {
    case Classification::Spot: return "Spot";
    case Classification::Gap: return "Gap";
    case Classification::Boundary: return "Boundary";
  }
  return "?";
}

std::pair<double, double> admissible_a_window(double b, double m) {
  const double lo = std::max(4.5 * b, 4.0 * b + 1.0 / b) * m;
  const double hi = (4.5 * b + 2.0 / b) * m;
  return {lo, hi};
}

bool restriction_satisfied(const ModelParams& p) {
  auto [lo, hi] = admissible_a_window(p.b, p.m);
  return p.a > lo && p.a < hi;
}

namespace {

double closed_form_margin(const ModelParams& p, double U2) {
  const double a = p.a, b = p.b, m = p.m;
  const double d = a - U2;
  return 1.5 - std::numbers::ln2 + U2 / (2.0 * m * m) * d + std::log(b / m * d) - b / m * d -
         (2.0 * b * b + 1.0) / (2.0 * m * m) * d * d;
}

}  // namespace

CriterionReport spot_gap_criterion(const ModelParams& p) {
  validate(p);
  CriterionReport r;
  r.restrictionSatisfied = restriction_satisfied(p);
  if (!r.restrictionSatisfied)
    throw Error("RestrictionViolated", "a/m outside the admissible window");
  const auto eq = equilibria(p);
  r.U2 = eq.P2->u;
  const double b = p.b, m = p.m;
  auto integrand = [&](double u) {
    return (u - 2.0 * m * b + std::sqrt(u * u - 4.0 * u * m * b)) / (2.0 * b * b);
  };
  double err = 0.0;
  r.lhsIntegral = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      integrand, r.U2, u_front(p), 15, 1e-12, &err);
  r.rhs = 0.5 * (p.a - r.U2) * (p.a - r.U2);
  r.closedFormMargin = closed_form_margin(p, r.U2);
  r.lhsAntiderivative = r.rhs + m * m * r.closedFormMargin;
  const double diff = r.lhsIntegral - r.rhs;
  if (std::abs(diff) <= kBoundaryTol)
    r.classification = Classification::Boundary;
  else
    r.classification = diff > 0.0 ? Classification::Spot : Classification::Gap;
  return r;
}

double boundary_a(double b, double m, double tol) {
  auto [lo, hi] = admissible_a_window(b, m);
  auto margin = [&](double a) {
    ModelParams p{a, b, m, 0.0};
    return closed_form_margin(p, equilibria(p).P2->u);
  };
  // Scan inward from the window edges for the first sign change.
  const int samples = 256;
  const double w = hi - lo;
  double x0 = lo + w * 1e-9, f0 = margin(x0);
  for (int i = 1; i <= samples; ++i) {
    double x1 = i == samples ? hi - w * 1e-9 : lo + w * i / samples;
    double f1 = margin(x1);
    if ((f0 > 0.0) != (f1 > 0.0)) {
      while (x1 - x0 > tol) {
        double xm = 0.5 * (x0 + x1);
        double fm = margin(xm);
        if ((fm > 0.0) == (f0 > 0.0)) {
          x0 = xm;
          f0 = fm;
        } else {
          x1 = xm;
        }
      }
      return 0.5 * (x0 + x1);
    }
    x0 = x1;
    f0 = f1;
  }
  throw Error("NoIntersection", "criterion margin has no sign change in the window");
}

Reaction reaction(double u, double v, const ModelParams& p) {
  const double uv2 = u * v * v;
  return {p.a - u - uv2, -p.m * v + uv2 * (1.0 - p.b * v)};
}

ReactionJacobian reaction_jacobian(double u, double v, const ModelParams& p) {
  ReactionJacobian j;
  j.uu = -1.0 - v * v;
  j.uv = -2.0 * u * v;
  j.vu = v * v * (1.0 - p.b * v);
  j.vv = -p.m + u * (2.0 * v - 3.0 * p.b * v * v);
  return j;
}

}  // namespace vegspot
