#include "doctest_main.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <numbers>
#include <random>

#include "vegspot/sim2d.hpp"

using namespace vegspot;

namespace {

double max_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) d = std::max(d, std::abs(a[k] - b[k]));
  return d;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

// Smooth v-field with interface R(theta) centred at the origin.
Field2D synthetic(double R0, double eps, int mode, bool gap) {
  const ModelParams p{2.625, 1.0, 0.5, 0.05};
  Field2D f = homogeneous_field(p, 256, 12.0, p.a, 0.0);
  for (int j = 0; j < f.n; ++j)
    for (int i = 0; i < f.n; ++i) {
      const double x = f.x(i), y = f.x(j), th = std::atan2(y, x);
      const double R = R0 + eps * std::cos(mode * th);
      const double s = 0.5 * (1.0 - std::tanh((std::hypot(x, y) - R) / 0.2));
      f.v[static_cast<std::size_t>(j) * f.n + i] = gap ? 1.0 - s : s;
    }
  return f;
}

// Manufactured fields on [-pi, pi)^2.
struct Exact {
  double u(double x, double y, double t) const { return 2.0 + 0.2 * std::sin(x) * std::cos(y) * std::cos(t); }
  double v(double x, double y, double t) const { return 0.5 + 0.1 * std::cos(x) * std::sin(2 * y) * std::exp(-t); }
};

Forcing manufactured(const ModelParams& p) {
  return [p](double x, double y, double t) -> std::array<double, 2> {
    Exact e;
    const double U = e.u(x, y, t), V = e.v(x, y, t);
    const double Ut = -0.2 * std::sin(x) * std::cos(y) * std::sin(t), lapU = -2.0 * (U - 2.0);
    const double Vt = -(V - 0.5), lapV = -5.0 * (V - 0.5);
    const double uv2 = U * V * V;
    return {Ut - lapU - (p.a - U - uv2), Vt - p.delta * p.delta * lapV - (-p.m * V + uv2 * (1.0 - p.b * V))};
  };
}

Field2D manufactured_solve(int n, double dt, double T, const ModelParams& p) {
  Field2D f = homogeneous_field(p, n, 2 * std::numbers::pi, 0.0, 0.0);
  Exact e;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      f.u[static_cast<std::size_t>(j) * n + i] = e.u(f.x(i), f.x(j), 0.0);
      f.v[static_cast<std::size_t>(j) * n + i] = e.v(f.x(i), f.x(j), 0.0);
    }
  Integrator I(n, f.L, p.delta, {.dt = dt, .reactionCfl = 1e3, .forcing = manufactured(p)});
  I.advance(f, T);
  return f;
}

double manufactured_error(int n, double dt, double T, const ModelParams& p) {
  const Field2D f = manufactured_solve(n, dt, T, p);
  Exact e;
  double err = 0.0;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      err = std::max(err, std::abs(f.u[static_cast<std::size_t>(j) * n + i] - e.u(f.x(i), f.x(j), T)));
      err = std::max(err, std::abs(f.v[static_cast<std::size_t>(j) * n + i] - e.v(f.x(i), f.x(j), T)));
    }
  return err;
}

}  // namespace

TEST_CASE("homogeneous vegetated state is a fixed point") {
  const ModelParams p{2.625, 1.0, 0.5, 0.05};
  const auto P2 = *equilibria(p).P2;
  Field2D f = homogeneous_field(p, 32, 32 * p.delta / 3.0, P2.u, P2.v);
  Field2D g = run(f, 100.0, 50.0);
  CHECK(g.t == doctest::Approx(100.0));
  for (std::size_t k = 0; k < g.u.size(); ++k) {
    REQUIRE(std::abs(g.u[k] - P2.u) <= 1e-10);
    REQUIRE(std::abs(g.v[k] - P2.v) <= 1e-10);
  }
}

TEST_CASE("diffusion substep") {
  const int n = 64;
  const double L = 64 * 0.05 / 3.0;
  Integrator I(n, L, 0.05);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::vector<double> x(n * n);
  for (auto& q : x) q = U(rng);
  double m0 = 0.0;
  for (double q : x) m0 += q;
  I.diffuse(x, 0.7, false);
  double m1 = 0.0, lo = INFINITY;
  for (double q : x) {
    m1 += q;
    lo = std::min(lo, q);
  }
  CHECK(std::abs(m1 - m0) <= 1e-12 * m0);
  CHECK(lo >= 0.0);

  // A single lattice mode decays by the exact exponential of its symbol.
  const double h = L / n, th = 2 * std::numbers::pi * 3 / n;
  const double sym = (8.0 * (std::cos(th) + 1.0) + 4.0 * std::cos(th) - 20.0) / (6.0 * h * h);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) x[j * n + i] = std::cos(th * i);
  I.diffuse(x, 0.01, true);
  const double f = std::exp(0.01 * 0.05 * 0.05 * sym);
  for (int i = 0; i < n; ++i) CHECK(x[5 * n + i] == doctest::Approx(f * std::cos(th * i)).epsilon(1e-12));
}

TEST_CASE("grid resolution is enforced") {
  CHECK_THROWS_AS(Integrator(64, 10.0, 0.05), Error);
  CHECK_THROWS_AS(Integrator(63, 1.0, 0.05), Error);
}

TEST_CASE("embedding a radial profile") {
  const ModelParams p{2.55, 1.0, 0.5, 0.05};
  auto prof = solve_profile(initial_guess(ProfileKind::Spot, p, {1.3}, RadialGrid{20.0, 1601}));
  auto f = embed_radial(prof, 256, 4.0, 0.0, 1);
  const int n = f.n;
  double asym = 0.0;
  for (int j = 1; j < n; ++j)
    for (int i = 1; i < n; ++i) {
      const double a = f.v[j * n + i];
      asym = std::max({asym, std::abs(a - f.v[i * n + j]), std::abs(a - f.v[j * n + (n - i)])});
    }
  CHECK(asym <= 1e-6);
  const double vmax = *std::max_element(prof.v.begin(), prof.v.end());
  CHECK(std::abs(*std::max_element(f.v.begin(), f.v.end()) - vmax) <= 1e-4);

  auto a = embed_radial(prof, 128, 4.0, 1e-3, 42), b = embed_radial(prof, 128, 4.0, 1e-3, 42);
  CHECK(a.v == b.v);
  CHECK(a.u == b.u);
  auto c = embed_radial(prof, 128, 4.0, 1e-3, 43);
  CHECK(a.v != c.v);
  CHECK(*std::min_element(a.v.begin(), a.v.end()) >= 0.0);

  CHECK_THROWS_AS(embed_radial(prof, 128, 2.0, 0.0, 1), Error);
}

TEST_CASE("runs are bit-identical") {
  const ModelParams p{2.55, 1.0, 0.5, 0.05};
  auto prof = solve_profile(initial_guess(ProfileKind::Spot, p, {1.3}, RadialGrid{20.0, 1601}));
  auto f = embed_radial(prof, 256, 3.2, 1e-3, 7);
  const auto base = std::filesystem::temp_directory_path() / "vegspot_sim_det";
  std::filesystem::remove_all(base);
  for (const char* d : {"a", "b"}) {
    RunOptions o;
    o.outDir = base / d;
    o.seed = 7;
    run(f, 2.0, 1.0, o);
  }
  for (const char* name : {"u_2.f64", "v_2.f64", "v_1.f64", "snapshots.json"}) {
    CHECK(std::filesystem::exists(base / "a" / name));
    CHECK(slurp(base / "a" / name) == slurp(base / "b" / name));
  }
  std::filesystem::remove_all(base);
}

TEST_CASE("scheme order on a manufactured solution") {
  ModelParams p{2.625, 1.0, 0.5, 0.5};
  // Time: differences of successive refinements on one grid remove the spatial error.
  const auto f1 = manufactured_solve(64, 0.2, 1.0, p), f2 = manufactured_solve(64, 0.1, 1.0, p),
             f3 = manufactured_solve(64, 0.05, 1.0, p);
  const double tr = std::max(max_diff(f1.u, f2.u), max_diff(f1.v, f2.v)) /
                    std::max(max_diff(f2.u, f3.u), max_diff(f2.v, f3.v));
  CHECK(tr >= 3.5);
  CHECK(tr <= 4.5);

  p.delta = 1.0;
  const double s1 = manufactured_error(24, 0.002, 0.2, p), s2 = manufactured_error(48, 0.002, 0.2, p);
  CHECK(s1 / s2 >= 3.5);
  CHECK(s1 / s2 <= 4.5);
}

TEST_CASE("blow-up is reported") {
  const ModelParams p{2.625, 1.0, 0.5, 0.5};
  Field2D f = homogeneous_field(p, 16, 2.0, p.a, 0.0);
  RunOptions o;
  o.step.forcing = [](double, double, double) { return std::array<double, 2>{1e9, 0.0}; };
  CHECK_THROWS_WITH_AS(run(f, 1.0, 1.0, o), doctest::Contains("BlowUp"), Error);
}

TEST_CASE("interface diagnostics") {
  auto d = interface_diagnostics(synthetic(3.0, 0.05, 5, false), {.level = 0.5});
  REQUIRE(d.starShaped);
  CHECK(d.rho.size() == 256);
  CHECK(d.amp.size() == 33);
  CHECK(d.amp[0] == doctest::Approx(3.0).epsilon(1e-3));
  CHECK(d.amp[5] == doctest::Approx(0.05).epsilon(0.03));
  CHECK(std::abs(d.cx) < 1e-6);
  for (int l : {2, 3, 4, 7}) CHECK(d.amp[l] < 1e-3);

  auto g = interface_diagnostics(synthetic(3.0, 0.0, 0, true), {.level = 0.5});
  REQUIRE(g.starShaped);
  CHECK(g.amp[0] == doctest::Approx(3.0).epsilon(1e-3));

  // An annulus: every ray crosses the level set twice.
  Field2D ring = synthetic(3.0, 0.0, 0, false);
  for (int j = 0; j < ring.n; ++j)
    for (int i = 0; i < ring.n; ++i)
      if (std::hypot(ring.x(i), ring.x(j)) < 1.5) ring.v[static_cast<std::size_t>(j) * ring.n + i] = 0.0;
  CHECK_FALSE(interface_diagnostics(ring, {.level = 0.5}).starShaped);
}

TEST_CASE("growth rate fits") {
  std::vector<InterfaceDiagnostics> diag;
  for (int k = 0; k < 10; ++k) {
    InterfaceDiagnostics d;
    d.t = 10.0 * k;
    d.starShaped = true;
    d.amp.assign(33, 0.0);
    d.amp[0] = 3.0;
    for (int l = 1; l <= 32; ++l) d.amp[l] = 1e-4 * std::exp((0.002 * l - 0.01) * d.t);
    diag.push_back(d);
  }
  auto fit = growth_rates(diag);
  REQUIRE(fit.size() == 32);
  for (const auto& f : fit) {
    CHECK(f.rate == doctest::Approx(0.002 * f.l - 0.01).epsilon(1e-9));
    CHECK(f.samples == 10);
  }
  // l = 32 reaches 5% of the radius at t ~ 90 and closes the window.
  diag[9].amp[32] = 0.2;
  CHECK(growth_rates(diag).front().samples == 9);
  CHECK_THROWS_AS(growth_rates(diag, 0.05, 60.0), Error);
}
