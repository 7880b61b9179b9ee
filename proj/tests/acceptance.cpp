// Acceptance run: one line per criterion. Exit status is nonzero only for failures
// that are not listed as documented deviations.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "vegspot/bessel.hpp"
#include "vegspot/sim2d.hpp"
#include "vegspot/spectral.hpp"

using namespace vegspot;

namespace {

const ModelParams kSpot{2.625, 1.0, 0.5, 0.05};
const ModelParams kGap{2.665, 1.0, 0.5, 0.05};

struct Outcome {
  bool pass = true;
  bool deviation = false;  // failure is a documented deviation
  std::string detail;
};

void note(Outcome& o, const char* fmt, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, fmt, args...);
  if (!o.detail.empty()) o.detail += "; ";
  o.detail += buf;
}

int undocumented = 0;

void criterion(int id, const char* title, double limitSeconds, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, false, std::string("exception: ") + e.what()};
  }
  const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (sec > limitSeconds) {
    o.pass = false;
    o.deviation = false;
    note(o, "runtime %.1f s over %.0f s", sec, limitSeconds);
  }
  const char* status = o.pass ? "PASS" : (o.deviation ? "FAIL (documented deviation)" : "FAIL");
  if (!o.pass && !o.deviation) ++undocumented;
  std::printf("criterion %d [%s]: %s | %s | %.1f s\n", id, title, status, o.detail.c_str(), sec);
  std::fflush(stdout);
}

// Combines a real check with o; real failures override a documented one.
void require(Outcome& o, bool ok) {
  if (!ok) {
    o.pass = false;
    o.deviation = false;
  }
}

void expect_documented(Outcome& o, bool ok) {
  if (ok) return;
  if (o.pass) o.deviation = true;
  o.pass = false;
}

ModelParams random_admissible(std::mt19937_64& rng, double delta) {
  std::uniform_real_distribution<double> ub(0.3, 3.0), um(0.1, 3.0), ut(0.02, 0.98);
  const double b = ub(rng), m = um(rng);
  auto [lo, hi] = admissible_a_window(b, m);
  return {lo + ut(rng) * (hi - lo), b, m, delta};
}

RadialProfile solved(ProfileKind k, const ModelParams& p, std::vector<double> radii, RadialGrid g) {
  return solve_profile(initial_guess(k, p, radii, g));
}

struct SpotSpectrum {
  RadialProfile prof;
  SpectrumResult spec;
};

const SpotSpectrum& unstable_spot() {
  static const SpotSpectrum s = [] {
    auto prof = solved(ProfileKind::Spot, kSpot, {5.66}, RadialGrid{20.0, 1601});
    auto spec = direct_spectrum(prof, 0, 12, {.k = 3, .keepVectors = true});
    return SpotSpectrum{prof, spec};
  }();
  return s;
}

Outcome window_arithmetic() {
  Outcome o;
  auto [lo, hi] = admissible_a_window(1.0, 0.5);
  note(o, "window (%.17g, %.17g)", lo, hi);
  require(o, lo == 2.5 && hi == 3.25);
  for (double a : {2.5, 3.25, 2.49}) require(o, !restriction_satisfied({a, 1.0, 0.5, 0.0}));
  for (double a : {2.5 + 1e-12, 2.625, 3.25 - 1e-12}) require(o, restriction_satisfied({a, 1.0, 0.5, 0.0}));
  return o;
}

Outcome spot_gap_boundary() {
  Outcome o;
  const double ab = boundary_a(1.0, 0.5);
  note(o, "boundary a = %.10f", ab);
  require(o, std::abs(ab - 2.6369) <= 1e-3);
  std::mt19937_64 rng(101);
  double worst = 0.0;
  for (int s = 0; s < 100; ++s) {
    auto r = spot_gap_criterion(random_admissible(rng, 0.0));
    worst = std::max(worst, std::abs(r.lhsIntegral - r.lhsAntiderivative));
  }
  note(o, "max |integral - closed form| = %.2e over 100 triples", worst);
  require(o, worst <= 1e-8);
  return o;
}

Outcome radius_prediction() {
  Outcome o;
  const double sSing = predict_interface_radius(kSpot).rI;
  const double gSing = predict_interface_radius(kGap).rI;
  const RadialGrid g{20.0, 1601};
  const double sBvp = solved(ProfileKind::Spot, kSpot, {5.66}, g).interfaces.at(0);
  const double gBvp = solved(ProfileKind::Gap, kGap, {5.85}, g).interfaces.at(0);
  note(o, "BVP spot %.4f gap %.4f", sBvp, gBvp);
  require(o, std::abs(sBvp - 5.66) <= 0.15 && std::abs(gBvp - 5.85) <= 0.15);

  // Refinement at a = 2.6, where the spot stays well inside rMax = 20 for all delta.
  ModelParams p{2.6, 1.0, 0.5, 0.0};
  const double ref = predict_interface_radius(p).rI;
  double d[3];
  const double deltas[3] = {0.05, 0.025, 0.0125};
  for (int i = 0; i < 3; ++i) {
    p.delta = deltas[i];
    d[i] = std::abs(solved(ProfileKind::Spot, p, {ref}, make_grid(20.0, p.delta)).interfaces.at(0) - ref);
  }
  const double r1 = d[0] / d[1], r2 = d[1] / d[2];
  note(o, "a=2.6 |rI(delta)-rI0| = %.3f, %.3f, %.3f (ratios %.2f, %.2f)", d[0], d[1], d[2], r1, r2);
  require(o, r1 >= 1.5 && r1 <= 2.5 && r2 >= 1.5 && r2 <= 2.5 && d[2] < d[1] && d[1] < d[0]);

  note(o, "singular spot %.3f gap %.3f", sSing, gSing);
  expect_documented(o, std::abs(sSing - sBvp) <= 0.5 && std::abs(gSing - gBvp) <= 0.5);
  return o;
}

Outcome front_speeds() {
  Outcome o;
  const double c1 = solve_traveling_front(kSpot).speed;
  const double c2 = solve_traveling_front(kGap).speed;
  note(o, "c(2.625) = %.5f, c(2.665) = %.5f", c1, c2);
  require(o, std::abs(c1 - 0.012) <= 0.005 && std::abs(c2 + 0.013) <= 0.005);
  return o;
}

Outcome sideband() {
  Outcome o;
  std::mt19937_64 rng(29);
  double least = INFINITY;
  for (int s = 0; s < 20; ++s) least = std::min(least, sideband_coefficient(random_admissible(rng, 0.05)).lambda2c);
  note(o, "min lambda_2c = %.3e over 20 triples", least);
  require(o, least > 0.0);
  double worst = 0.0;
  for (double b : {0.5, 1.0, 2.0})
    for (double m : {0.25, 0.5, 2.0}) {
      const ModelParams p{5.0, b, m, 0.05};
      const double exact = 2.0 / (3.0 * b * std::sqrt(m));
      worst = std::max(worst, std::abs(layer_quotient(u_front(p), 0.0, p) - exact));
    }
  note(o, "layer quotient error %.1e", worst);
  require(o, worst <= 1e-6);
  return o;
}

Outcome spectral_cross_validation() {
  Outcome o;
  const auto& [prof, spec] = unstable_spot();
  const double rI = prof.interfaces.at(0);
  const auto& t = spec.at(1).eigs.front();
  note(o, "rI %.4f, lambda(l=1) = %.1e, overlap %.6f", rI, std::abs(t.lambda), translation_overlap(prof, t.vector));
  require(o, std::abs(t.lambda) <= 5e-3);

  std::vector<int> band;
  for (const auto& m : spec.modes)
    if (m.max_real() > 0.0) band.push_back(m.l);
  require(o, !band.empty());
  if (!band.empty()) {
    note(o, "unstable band %d..%d", band.front(), band.back());
    require(o, band.front() >= 2 && band.back() <= 12 &&
                   band.back() - band.front() + 1 == static_cast<int>(band.size()));
  }

  auto bg = core_background(rI, prof.params);
  int agree = 0;
  for (int l = 2; l <= 8; ++l) {
    const double f = lambda1_formula(l, rI, prof.params, slow_eigenfunction_ratio(l, bg, rI, prof.params)).lambda1;
    agree += (f > 0.0) == (spec.at(l).max_real() > 0.0);
  }
  note(o, "lambda_1 sign agreement %d/7", agree);
  require(o, agree == 7);

  const double plateau = lambda1_plateau(rI, prof.params);
  const double far = lambda1_formula(64, rI, prof.params, slow_eigenfunction_ratio(64, bg, rI, prof.params)).lambda1;
  note(o, "lambda_1(64) = %.4f vs plateau %.4f", far, plateau);
  require(o, far > 0.0 && std::abs(far / plateau - 1.0) <= 0.3);
  return o;
}

Outcome stable_solutions() {
  Outcome o;
  struct Case {
    const char* name;
    ProfileKind kind;
    double a;
    std::vector<double> radii;
  };
  const Case cases[] = {{"spot", ProfileKind::Spot, 2.55, {1.3}},
                        {"gap", ProfileKind::Gap, 2.765, {1.3}},
                        {"ring", ProfileKind::Ring, 2.538, {3.8, 4.9}},
                        {"target", ProfileKind::Target, 2.78, {1.2, 3.0, 4.2}}};
  for (const auto& c : cases) {
    ModelParams p = kSpot;
    p.a = c.a;
    auto prof = solved(c.kind, p, c.radii, RadialGrid{20.0, 1601});
    require(o, prof.converged && prof.interfaces.size() == c.radii.size());
    auto s = direct_spectrum(prof, 0, 12, {.k = 2});
    int arg = -1;
    double best = -INFINITY, rest = -INFINITY;
    for (const auto& m : s.modes) {
      if (m.l != 1) rest = std::max(rest, m.max_real());
      if (m.max_real() > best) {
        best = m.max_real();
        arg = m.l;
      }
    }
    note(o, "%s max Re %.1e at l=%d (others <= %.1e)", c.name, best, arg, rest);
    require(o, best <= 5e-3 && arg == 1);
  }
  return o;
}

double max_mode(const InterfaceDiagnostics& d) {
  double a = 0.0;
  for (std::size_t l = 2; l < d.amp.size(); ++l) a = std::max(a, d.amp[l]);
  return a;
}

Outcome fingering() {
  Outcome o;
  const auto& [prof, spec] = unstable_spot();
  std::vector<InterfaceDiagnostics> diag;
  double onset = NAN;
  RunOptions ro;
  ro.step.dt = 0.1;
  run(embed_radial(prof, 1024, 16.0, 1e-3, 1), 2000.0, 20.0, ro, [&](const Field2D& f) {
    auto d = interface_diagnostics(f);
    if (!d.starShaped && std::isnan(onset)) onset = f.t;
    if (d.starShaped) diag.push_back(std::move(d));
  });
  auto fits = growth_rates(diag, 0.05, 20.0);
  int agree = 0;
  std::string rates;
  for (int l = 2; l <= 8; ++l) {
    double r = NAN;
    for (const auto& f : fits)
      if (f.l == l) r = f.rate;
    agree += (r > 0.0) == (spec.at(l).max_real() > 0.0);
    char buf[48];
    std::snprintf(buf, sizeof buf, "%s%.1e", l == 2 ? "" : " ", r);
    rates += buf;
  }
  note(o, "fitted rates l=2..8: %s; sign agreement %d/7", rates.c_str(), agree);
  require(o, agree == 7);

  ModelParams p = kSpot;
  p.a = 2.55;
  auto stable = solved(ProfileKind::Spot, p, {1.3}, RadialGrid{20.0, 1601});
  double initial = NAN, worst = 0.0, r0 = NAN, rEnd = NAN;
  bool star = true;
  run(embed_radial(stable, 512, 8.0, 1e-3, 2), 2000.0, 20.0, ro, [&](const Field2D& f) {
    auto d = interface_diagnostics(f);
    star = star && d.starShaped;
    if (!d.starShaped) return;
    if (std::isnan(initial)) {
      initial = max_mode(d);
      r0 = d.amp[0];
    }
    worst = std::max(worst, max_mode(d));
    rEnd = d.amp[0];
  });
  note(o, "stable spot radius %.3f -> %.3f, max mode %.1e vs initial %.1e", r0, rEnd, worst, initial);
  require(o, star && worst < 3.0 * initial && std::abs(rEnd - r0) < 0.1 * r0);

  if (std::isnan(onset))
    note(o, "%s", "no fingering onset by t=2000");
  else
    note(o, "fingering onset at t=%.0f", onset);
  expect_documented(o, !std::isnan(onset));
  return o;
}

Outcome property_suites() {
  Outcome o;
  std::mt19937_64 rng(7);
  // Bessel
  double wr = 0.0, rec = 0.0;
  std::uniform_int_distribution<int> order(0, bessel::kMaxOrder);
  std::uniform_real_distribution<double> lx(std::log(1e-3), std::log(1e3));
  for (int s = 0; s < 1000; ++s) {
    const int n = order(rng);
    const double x = std::exp(lx(rng));
    const double is = bessel::bessel_i_scaled(n, x), ks = bessel::bessel_k_scaled(n, x);
    if (!std::isfinite(ks) || is == 0.0) continue;
    wr = std::max(wr, std::abs(x * is * ks * (bessel::bessel_k_ratio(n, x) - bessel::bessel_i_ratio(n, x)) + 1.0));
  }
  for (double x : {0.3, 1.0, 4.0, 25.0})
    for (int n = 1; n < bessel::kMaxOrder; ++n) {
      const double km = bessel::bessel_k_scaled(n - 1, x), k = bessel::bessel_k_scaled(n, x),
                   kp = bessel::bessel_k_scaled(n + 1, x);
      if (!std::isfinite(kp)) break;
      rec = std::max(rec, std::abs(kp - km - 2.0 * n / x * k) / kp);
    }
  note(o, "Wronskian %.1e recurrence %.1e", wr, rec);
  require(o, wr <= 1e-10 && rec <= 1e-10);

  // Energy along the large-r flow
  double en = 0.0;
  for (auto [u0, p0] : {std::pair{2.3, -0.2}, std::pair{2.05, 0.01}, std::pair{2.6, -0.55}}) {
    auto tr = reduced_flow_infinity(u0, p0, 50.0, kSpot);
    const double E0 = energy(u0, p0, kSpot);
    for (const auto& s : tr.samples)
      en = std::max(en, std::abs(energy(s.u, s.p, kSpot) - E0) / std::max(1.0, 0.5 * s.p * s.p));
  }
  note(o, "energy drift %.1e", en);
  require(o, en <= 1e-9);

  // Layer fronts and the translation kernel
  ModelParams p0 = kSpot;
  p0.delta = 0.0;
  std::uniform_real_distribution<double> uu(u_fold(p0) * (1 + 1e-9), 2.0 * u_front(p0));
  double lr = 0.0, kern = 0.0;
  const double Z = 30.0 / std::sqrt(p0.m);
  for (int s = 0; s < 50; ++s) {
    const double u = uu(rng);
    for (auto dir : {Direction::VegToDesert, Direction::DesertToVeg}) {
      auto f = layer_front(dir, u, p0);
      for (int i = 0; i < 200; ++i) lr = std::max(lr, std::abs(f.layer_residual(-Z + 2.0 * Z * i / 199.0, p0)));
    }
  }
  for (double b : {0.5, 1.0, 2.0}) {
    ModelParams p{2.625, b, 0.5, 0.0};
    const double uf = u_front(p);
    auto f = layer_front(Direction::VegToDesert, uf, p);
    for (double z = -40.0; z <= 40.0; z += 0.1) {
      const double v = f.v(z);
      kern = std::max(kern, std::abs(f.derivative(3, z) - p.m * f.q(z) + uf * (2 * v - 3 * b * v * v) * f.q(z)));
    }
  }
  note(o, "layer residual %.1e kernel %.1e", lr, kern);
  require(o, lr <= 1e-10 && kern <= 1e-8);

  // Monotonicity of Gamma_out and of the core shot
  bool mono = true;
  double prev = INFINITY;
  for (int i = 0; i < 1000; ++i) {
    const double r = std::exp(std::log(1e-3) + std::log(1e6) * i / 999.0);
    const double g = gamma_out(r, kSpot);
    mono = mono && g < prev && gamma_out_slope(r, kSpot) < 0.0;
    prev = g;
  }
  const double lo = equilibria(kSpot).P2->u, uf = u_front(kSpot);
  double pr = INFINITY, pp = INFINITY;
  for (int i = 0; i < 50; ++i) {
    auto tr = reduced_flow_shoot(lo + (uf - lo) * (i + 1) / 51.0, kSpot, {.record = false});
    mono = mono && tr.rF < pr && tr.pF < pp;
    pr = tr.rF;
    pp = tr.pF;
  }
  note(o, "monotonicity %s", mono ? "ok" : "violated");
  require(o, mono);

  // Jacobians against finite differences
  const RadialGrid g{20.0, 1601};
  auto guess = initial_guess(ProfileKind::Spot, kSpot, {5.66}, g);
  Eigen::VectorXd z(2 * g.n);
  for (int i = 0; i < g.n; ++i) {
    z[2 * i] = guess.u[i];
    z[2 * i + 1] = guess.v[i];
  }
  const auto J = bvp_jacobian(g, kSpot, z);
  std::normal_distribution<double> nd;
  double jac = 0.0;
  for (int k = 0; k < 10; ++k) {
    Eigen::VectorXd d(z.size());
    for (auto& x : d) x = nd(rng);
    const double eps = 1e-6;
    const Eigen::VectorXd fd = (bvp_residual(g, kSpot, z + eps * d) - bvp_residual(g, kSpot, z - eps * d)) / (2 * eps);
    jac = std::max(jac, (fd - J * d).norm() / (J * d).norm());
  }
  note(o, "Jacobian FD %.1e", jac);
  require(o, jac <= 1e-5);

  // Second-order grid convergence of the radius and of an eigenvalue
  double r[3], lam[3];
  for (int f = 0; f < 3; ++f) {
    auto prof = solved(ProfileKind::Spot, kSpot, {5.66}, RadialGrid{20.0, 1 + (1600 << f)});
    r[f] = prof.interfaces.at(0);
    lam[f] = rightmost_eigenvalues(stability_matrix(prof, 5), {.k = 1}, -0.5)[0].lambda.real();
  }
  const double rr = (r[0] - r[1]) / (r[1] - r[2]), lr2 = (lam[0] - lam[1]) / (lam[1] - lam[2]);
  note(o, "grid ratios radius %.2f eigenvalue %.2f", rr, lr2);
  require(o, rr >= 3.5 && rr <= 4.5 && lr2 >= 3.5 && lr2 <= 4.5);
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  const bool quick = argc > 1 && std::strcmp(argv[1], "--quick") == 0;
  criterion(1, "existence window", 1.0, window_arithmetic);
  criterion(2, "spot/gap boundary", 5.0, spot_gap_boundary);
  criterion(3, "radius prediction vs BVP", 120.0, radius_prediction);
  criterion(4, "front speeds", 30.0, front_speeds);
  criterion(5, "sideband positivity", 10.0, sideband);
  criterion(6, "spectral cross-validation", 180.0, spectral_cross_validation);
  criterion(7, "stable solutions", 600.0, stable_solutions);
  if (quick)
    std::printf("criterion 8 [fingering]: SKIPPED (--quick)\n");
  else
    criterion(8, "fingering", 1200.0, fingering);
  criterion(9, "property suites", 120.0, property_suites);
  std::printf("%d undocumented failure(s)\n", undocumented);
  return undocumented == 0 ? 0 : 1;
}
