#include "vegspot/radial_bvp.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <Eigen/SparseLU>

#include "vegspot/bessel.hpp"
#include "vegspot/io.hpp"
#include "vegspot/singular_geometry.hpp"

namespace vegspot {

namespace {

double inf_norm(const Eigen::VectorXd& r) { return r.size() ? r.cwiseAbs().maxCoeff() : 0.0; }

Eigen::VectorXd pack(const std::vector<double>& u, const std::vector<double>& v) {
  Eigen::VectorXd z(2 * u.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    z[2 * i] = u[i];
    z[2 * i + 1] = v[i];
  }
  return z;
}

void unpack(const Eigen::VectorXd& z, std::vector<double>& u, std::vector<double>& v) {
  const std::size_t n = static_cast<std::size_t>(z.size() / 2);
  u.resize(n);
  v.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    u[i] = z[2 * i];
    v[i] = z[2 * i + 1];
  }
}

// Discrete (d2/dr2 + (1/r) d/dr) as weights on (i-1, i, i+1); even extension at r = 0,
// mirror (Neumann) at rMax.
struct Stencil {
  double lo, mid, hi;
};

Stencil radial_laplacian(const RadialGrid& g, int i) {
  const double h = g.h(), ih2 = 1.0 / (h * h);
  if (i == 0) return {0.0, -4.0 * ih2, 4.0 * ih2};
  if (i == g.n - 1) return {2.0 * ih2, -2.0 * ih2, 0.0};
  const double c = 1.0 / (2.0 * h * g.r(i));
  return {ih2 - c, -2.0 * ih2, ih2 + c};
}

void check_grid(const RadialGrid& g, double delta) {
  if (g.n < 401) throw Error("GridTooCoarse", "need at least 401 nodes");
  if (g.h() > 0.25 * delta * (1.0 + 1e-12))
    throw Error("GridTooCoarse", "grid spacing exceeds delta/4");
}


double newton(const RadialGrid& g, const ModelParams& p, Eigen::VectorXd& z, const NewtonOptions& opt,
              std::vector<double>& history) {
  Eigen::VectorXd R = bvp_residual(g, p, z);
  double nr = inf_norm(R);
  history.push_back(nr);
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  bool analyzed = false;
  for (int it = 0; it < opt.maxIter && !(nr <= opt.tol); ++it) {
    const auto J = bvp_jacobian(g, p, z);
    if (!analyzed) {
      lu.analyzePattern(J);
      analyzed = true;
    }
    lu.factorize(J);
    if (lu.info() != Eigen::Success) throw NewtonFailure("singular Jacobian", history);
    const Eigen::VectorXd dz = lu.solve(R);
    double lambda = 1.0;
    bool accepted = false;
    for (int k = 0; k <= opt.maxHalvings; ++k, lambda *= 0.5) {
      Eigen::VectorXd trial = z - lambda * dz;
      Eigen::VectorXd Rt = bvp_residual(g, p, trial);
      const double nt = inf_norm(Rt);
      // Non-monotone acceptance of the full step; see README.
      if (std::isfinite(nt) && nt < (k == 0 ? 10.0 : 1.0) * nr) {
        z.swap(trial);
        R.swap(Rt);
        nr = nt;
        accepted = true;
        break;
      }
    }
    history.push_back(nr);
    if (!accepted) throw NewtonFailure("line search exhausted at residual " + io::fmt17(nr), history);
  }
  if (!(nr <= opt.tol)) throw NewtonFailure("no convergence, residual " + io::fmt17(nr), history);
  return nr;
}

// Implicit Euler on z_t = F(z) with the step grown as the residual falls, until
// the residual is small enough to hand back to Newton.
void pseudo_transient(const RadialGrid& g, const ModelParams& p, Eigen::VectorXd& z,
                      const NewtonOptions& opt, std::vector<double>& history) {
  Eigen::VectorXd R = bvp_residual(g, p, z);
  double nr = inf_norm(R), dt = opt.ptcStep;
  Eigen::SparseMatrix<double> I(2 * g.n, 2 * g.n);
  I.setIdentity();
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  bool analyzed = false;
  for (int it = 0; it < opt.ptcMaxIter; ++it) {
    if (nr <= opt.ptcHandoff) return;
    Eigen::SparseMatrix<double> A = I / dt - bvp_jacobian(g, p, z);
    if (!analyzed) {
      lu.analyzePattern(A);
      analyzed = true;
    }
    lu.factorize(A);
    if (lu.info() != Eigen::Success) throw NewtonFailure("singular implicit-Euler matrix", history);
    Eigen::VectorXd trial = z + lu.solve(R);
    Eigen::VectorXd Rt = bvp_residual(g, p, trial);
    const double nt = inf_norm(Rt);
    if (!std::isfinite(nt)) {
      dt *= 0.25;
      continue;
    }
    dt = std::min(opt.ptcMaxStep, dt * std::clamp(nr / nt, 0.5, 2.0));
    // Fine grids floor the residual near roundoff, above the handoff level.
    const bool floored = nt <= opt.tol && nt >= 0.99 * nr;
    z.swap(trial);
    R.swap(Rt);
    nr = nt;
    history.push_back(nr);
    if (floored) return;
  }
  throw NewtonFailure("pseudo-transient iteration stalled at residual " + io::fmt17(nr), history);
}

}  // namespace

std::string to_string(ProfileKind k) {
  switch (k) {
    case ProfileKind::Spot: return "spot";
    case ProfileKind::Gap: return "gap";
    case ProfileKind::Ring: return "ring";
    case ProfileKind::Target: return "target";
    default: return "other";
  }
}

ProfileKind profile_kind_from_string(const std::string& s) {
  for (auto k : {ProfileKind::Spot, ProfileKind::Gap, ProfileKind::Ring, ProfileKind::Target,
                 ProfileKind::Other})
    if (to_string(k) == s) return k;
  throw domain_error("unknown profile kind '" + s + "'");
}

RadialGrid make_grid(double rMax, double delta, int nMin) {
  if (!(rMax > 0.0) || !(delta > 0.0)) throw domain_error("rMax and delta must be positive");
  const int n = std::max(nMin, static_cast<int>(std::ceil(rMax / (0.25 * delta))) + 1);
  return {rMax, n};
}

double default_rmax(double rIPredicted) { return std::max(20.0, 3.0 * rIPredicted); }

RadialProfile initial_guess(ProfileKind kind, const ModelParams& p, const std::vector<double>& radii,
                            const RadialGrid& grid) {
  validate(p);
  if (!(p.delta > 0.0)) throw domain_error("radial profiles need delta > 0");
  for (std::size_t j = 0; j < radii.size(); ++j) {
    if (!(radii[j] > 0.0 && radii[j] < grid.rMax))
      throw Error("BadRadii", "radii must lie in (0, rMax)");
    if (j > 0 && !(radii[j] - radii[j - 1] >= 10.0 * p.delta))
      throw Error("BadRadii", "radii must increase by at least 10 delta");
  }
  const bool single = kind == ProfileKind::Spot || kind == ProfileKind::Gap;
  if ((single && radii.size() != 1) || (kind == ProfileKind::Ring && radii.size() != 2) ||
      (kind == ProfileKind::Target && radii.size() < 2))
    throw Error("BadRadii", "wrong number of radii for " + to_string(kind));

  RadialProfile prof;
  prof.grid = grid;
  prof.params = p;
  prof.kind = kind;
  prof.u.assign(grid.n, p.a);
  prof.v.assign(grid.n, 0.0);
  if (kind == ProfileKind::Other && radii.empty()) return prof;

  const auto eq = equilibria(p);
  if (!eq.P2) throw domain_error("no vegetated state at these parameters");
  const double U2 = eq.P2->u, uf = u_front(p);
  const double kappa = std::sqrt(std::max(slow_nonlinearity_du(U2, p), 1e-12));
  // Targets sit in a vegetated background, so the core state depends on the parity.
  const bool vegCore = kind == ProfileKind::Spot ||
                       (kind == ProfileKind::Target && radii.size() % 2 == 0) ||
                       (kind == ProfileKind::Other && radii.size() % 2 == 1);
  const double w = 2.0 * p.delta / std::sqrt(p.m);

  for (int i = 0; i < grid.n; ++i) {
    const double r = grid.r(i);
    // Region index and distance to the nearest interface.
    std::size_t k = 0;
    while (k < radii.size() && r > radii[k]) ++k;
    double dist = INFINITY;
    for (double rj : radii) dist = std::min(dist, std::abs(r - rj));
    const bool veg = vegCore == (k % 2 == 0);
    double chi = vegCore ? 1.0 : 0.0;
    for (std::size_t j = 0; j < radii.size(); ++j) {
      const double s = 0.5 * (1.0 + std::tanh((r - radii[j]) / w));
      chi += ((vegCore == (j % 2 == 0)) ? -1.0 : 1.0) * s;
    }
    const double uVeg = U2 + (uf - U2) * std::exp(-kappa * dist);
    double uDes;
    if (!veg && k == radii.size() && r > 0.0) {
      const double rj = radii.back();
      uDes = p.a - (p.a - uf) * bessel::bessel_k_scaled(0, r) / bessel::bessel_k_scaled(0, rj) *
                       std::exp(rj - r);
    } else if (!veg && k == 0) {
      const double rj = radii.front();
      uDes = p.a - (p.a - uf) * bessel::bessel_i(0, std::max(r, 1e-300)) / bessel::bessel_i(0, rj);
    } else {
      uDes = p.a - (p.a - uf) * std::exp(-dist);
    }
    prof.u[i] = chi * uVeg + (1.0 - chi) * uDes;
    prof.v[i] = chi * v_plus(std::max(uVeg, u_fold(p)), p);
  }
  prof.interfaces = radii;
  return prof;
}

Eigen::VectorXd bvp_residual(const RadialGrid& g, const ModelParams& p, const Eigen::VectorXd& z) {
  const double d2 = p.delta * p.delta;
  Eigen::VectorXd R(2 * g.n);
  for (int i = 0; i < g.n; ++i) {
    const auto L = radial_laplacian(g, i);
    const double u = z[2 * i], v = z[2 * i + 1];
    double lu = L.mid * u, lv = L.mid * v;
    if (i > 0) {
      lu += L.lo * z[2 * i - 2];
      lv += L.lo * z[2 * i - 1];
    }
    if (i < g.n - 1) {
      lu += L.hi * z[2 * i + 2];
      lv += L.hi * z[2 * i + 3];
    }
    R[2 * i] = lu + p.a - u - u * v * v;
    R[2 * i + 1] = d2 * lv - p.m * v + u * v * v * (1.0 - p.b * v);
  }
  return R;
}

Eigen::SparseMatrix<double> bvp_jacobian(const RadialGrid& g, const ModelParams& p,
                                         const Eigen::VectorXd& z) {
  const double d2 = p.delta * p.delta;
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(static_cast<std::size_t>(8 * g.n));
  for (int i = 0; i < g.n; ++i) {
    const auto L = radial_laplacian(g, i);
    const double u = z[2 * i], v = z[2 * i + 1];
    const int ru = 2 * i, rv = 2 * i + 1;
    if (i > 0) {
      t.emplace_back(ru, 2 * i - 2, L.lo);
      t.emplace_back(rv, 2 * i - 1, d2 * L.lo);
    }
    if (i < g.n - 1) {
      t.emplace_back(ru, 2 * i + 2, L.hi);
      t.emplace_back(rv, 2 * i + 3, d2 * L.hi);
    }
    const auto J = reaction_jacobian(u, v, p);
    t.emplace_back(ru, ru, L.mid + J.uu);
    t.emplace_back(ru, rv, J.uv);
    t.emplace_back(rv, ru, J.vu);
    t.emplace_back(rv, rv, d2 * L.mid + J.vv);
  }
  Eigen::SparseMatrix<double> A(2 * g.n, 2 * g.n);
  A.setFromTriplets(t.begin(), t.end());
  return A;
}

double profile_residual_norm(const RadialProfile& prof) {
  return inf_norm(bvp_residual(prof.grid, prof.params, pack(prof.u, prof.v)));
}

std::vector<double> find_interfaces(const RadialGrid& g, const std::vector<double>& v) {
  const int n = g.n;
  const double h = g.h();
  const double vmax = *std::max_element(v.begin(), v.end());
  std::vector<double> out;
  if (!(vmax > 1e-3)) return out;
  const double half = 0.5 * vmax;

  std::vector<double> d2(n, 0.0), s(n, 0.0);
  for (int i = 1; i < n - 1; ++i) d2[i] = v[i + 1] - 2.0 * v[i] + v[i - 1];
  for (int i = 3; i < n - 3; ++i) s[i] = (d2[i - 2] + d2[i - 1] + d2[i] + d2[i + 1] + d2[i + 2]) / 5.0;

  for (int i = 0; i + 1 < n; ++i) {
    if ((v[i] - half) * (v[i + 1] - half) > 0.0 || v[i] == v[i + 1]) continue;
    if (v[i] == half && i > 0) continue;
    const double rc = g.r(i) + h * (half - v[i]) / (v[i + 1] - v[i]);
    // Steepest slope near the crossing sets the transition width.
    double slope = 0.0;
    for (int j = std::max(1, i - 5); j <= std::min(n - 2, i + 5); ++j)
      slope = std::max(slope, std::abs(v[j + 1] - v[j - 1]) / (2.0 * h));
    if (vmax / slope < 6.0 * h) throw Error("GridTooCoarse", "interface spans fewer than 6 nodes");
    const int win = std::max(4, static_cast<int>(std::ceil(vmax / slope / h)));
    const int lo = std::max(3, i - win), hi = std::min(n - 5, i + win);
    double best = rc, bestDist = INFINITY;
    for (int j = lo; j <= hi; ++j) {
      if (s[j] == 0.0 || s[j] * s[j + 1] > 0.0) continue;
      const double rz = g.r(j) + h * s[j] / (s[j] - s[j + 1]);
      if (std::abs(rz - rc) < bestDist) {
        bestDist = std::abs(rz - rc);
        best = rz;
      }
    }
    out.push_back(best);
  }
  return out;
}

ProfileKind classify_profile(const RadialProfile& prof) {
  const auto& v = prof.v;
  const double vmax = *std::max_element(v.begin(), v.end());
  const std::size_t k = prof.interfaces.size();
  if (!(vmax > 1e-3) || k == 0) return ProfileKind::Other;
  const bool vegCore = v.front() > 0.5 * vmax;
  const bool vegOuter = (k % 2 == 0) == vegCore;
  if (k == 1) return vegCore ? ProfileKind::Spot : ProfileKind::Gap;
  if (k == 2 && !vegCore) return ProfileKind::Ring;
  return vegOuter ? ProfileKind::Target : ProfileKind::Other;
}

RadialProfile solve_profile(const RadialProfile& guess, const NewtonOptions& opt) {
  const ModelParams& p = guess.params;
  validate(p);
  if (!(p.delta > 0.0)) throw domain_error("radial profiles need delta > 0");
  const RadialGrid& g = guess.grid;
  check_grid(g, p.delta);
  if (static_cast<int>(guess.u.size()) != g.n || static_cast<int>(guess.v.size()) != g.n)
    throw domain_error("profile size does not match its grid");

  Eigen::VectorXd z = pack(guess.u, guess.v);
  std::vector<double> history;
  try {
    newton(g, p, z, opt, history);
  } catch (const NewtonFailure&) {
    if (!opt.pseudoTransient) throw;
    z = pack(guess.u, guess.v);
    pseudo_transient(g, p, z, opt, history);
    newton(g, p, z, opt, history);
  }

  RadialProfile out;
  out.grid = g;
  out.params = p;
  unpack(z, out.u, out.v);
  out.residualNorm = inf_norm(bvp_residual(g, p, z));
  out.residualHistory = std::move(history);
  out.converged = true;
  out.interfaces = find_interfaces(g, out.v);
  out.kind = classify_profile(out);
  return out;
}

std::vector<RadialProfile> continue_in_a(const RadialProfile& start, double aTarget,
                                         const ContinuationOptions& opt) {
  if (!start.converged) throw domain_error("continuation needs a converged start profile");
  std::vector<RadialProfile> branch{start};
  const double dir = aTarget >= start.params.a ? 1.0 : -1.0;
  double step = opt.step;
  while (dir * (aTarget - branch.back().params.a) > 1e-14) {
    const RadialProfile& cur = branch.back();
    const double da = dir * std::min(step, std::abs(aTarget - cur.params.a));
    RadialProfile guess = cur;
    guess.params.a = cur.params.a + da;
    // Secant predictor from the last two points.
    if (branch.size() >= 2) {
      const RadialProfile& prev = branch[branch.size() - 2];
      const double s = da / (cur.params.a - prev.params.a);
      for (int i = 0; i < cur.grid.n; ++i) {
        guess.u[i] += s * (cur.u[i] - prev.u[i]);
        guess.v[i] += s * (cur.v[i] - prev.v[i]);
      }
    }
    bool ok = false;
    try {
      RadialProfile next = solve_profile(guess, {.pseudoTransient = false});
      ok = next.kind == cur.kind && next.interfaces.size() == cur.interfaces.size();
      if (ok) branch.push_back(std::move(next));
    } catch (const Error&) {
      ok = false;
    }
    if (!ok) {
      step *= 0.5;
      if (step < opt.minStep)
        throw Error("StepFloorReached", "continuation stalled at a = " + io::fmt17(cur.params.a));
      continue;
    }
    step = std::min(opt.maxStep, 1.5 * step);
    const auto& last = branch.back();
    if (!last.interfaces.empty() &&
        last.interfaces.back() > opt.stopRadiusFraction * last.grid.rMax)
      break;
  }
  return branch;
}

void write_profile(const std::filesystem::path& csv, const RadialProfile& prof) {
  {
    io::CsvWriter w(csv, {"r", "u", "v"});
    for (int i = 0; i < prof.grid.n; ++i) w.cell(prof.grid.r(i)).cell(prof.u[i]).cell(prof.v[i]).end_row();
  }
  io::json j;
  j["params"] = {{"a", prof.params.a}, {"b", prof.params.b}, {"m", prof.params.m},
                 {"delta", prof.params.delta}};
  j["grid"] = {{"rMax", prof.grid.rMax}, {"n", prof.grid.n}};
  j["residualNorm"] = prof.residualNorm;
  j["interfaces"] = prof.interfaces;
  j["kind"] = to_string(prof.kind);
  j["converged"] = prof.converged;
  auto side = csv;
  io::write_json(side.replace_extension(".json"), j);
}

RadialProfile read_profile(const std::filesystem::path& csv) {
  const auto t = io::read_csv(csv);
  auto side = csv;
  side.replace_extension(".json");
  if (!std::filesystem::exists(side)) throw Error("IOError", "missing sidecar " + side.string());
  const auto j = io::read_json(side);
  RadialProfile prof;
  prof.params = {j.at("params").at("a"), j.at("params").at("b"), j.at("params").at("m"),
                 j.at("params").at("delta")};
  prof.grid = {j.at("grid").at("rMax"), j.at("grid").at("n")};
  prof.u = t.column("u");
  prof.v = t.column("v");
  if (static_cast<int>(prof.u.size()) != prof.grid.n)
    throw Error("IOError", "row count does not match the sidecar grid");
  prof.residualNorm = profile_residual_norm(prof);
  prof.converged = j.value("converged", false) && prof.residualNorm <= 1e-9;
  prof.interfaces = find_interfaces(prof.grid, prof.v);
  prof.kind = classify_profile(prof);
  return prof;
}

}  // namespace vegspot
