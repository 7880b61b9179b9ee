#include "doctest_main.hpp"

#include <cmath>

#include "vegspot/bessel.hpp"
#include "vegspot/spectral.hpp"

using namespace vegspot;

namespace {

const ModelParams kSpot{2.625, 1.0, 0.5, 0.05};

RadialProfile solved(ProfileKind k, const ModelParams& p, std::vector<double> radii, int n = 1601) {
  return solve_profile(initial_guess(k, p, radii, RadialGrid{20.0, n}));
}

// k J_l'(kr)/J_l(kr) from the standard library.
double j_ratio(int l, double k, double r) {
  const double x = k * r;
  const double jl = std::cyl_bessel_j(static_cast<double>(l), x);
  const double jp = l == 0 ? -std::cyl_bessel_j(1.0, x) : std::cyl_bessel_j(l - 1.0, x) - l / x * jl;
  return k * jp / jl;
}

}  // namespace

TEST_CASE("far field") {
  CHECK(essential_spectrum_bound(kSpot) == -0.5);
  ModelParams p = kSpot;
  p.m = 2.0;
  CHECK(essential_spectrum_bound(p) == -1.0);

  auto mu = far_field_symbol_eigenvalues(0.0, kSpot);
  std::vector<double> re;
  for (int i = 0; i < 4; ++i) {
    CHECK(std::abs(mu[i].imag()) < 1e-12);
    re.push_back(mu[i].real());
  }
  std::sort(re.begin(), re.end());
  const double s = std::sqrt(kSpot.m) / kSpot.delta;
  CHECK(re[0] == doctest::Approx(-s));
  CHECK(re[1] == doctest::Approx(-1.0));
  CHECK(re[2] == doctest::Approx(1.0));
  CHECK(re[3] == doctest::Approx(s));
  CHECK(far_field_hyperbolicity(kSpot) > 0.0);
}

TEST_CASE("bare state is stable") {
  ModelParams p = kSpot;
  auto bare = solve_profile(initial_guess(ProfileKind::Other, p, {}, RadialGrid{10.0, 801}));
  auto s = direct_spectrum(bare, 0, 3, {.k = 4});
  for (const auto& m : s.modes) CHECK(m.max_real() <= -0.49);
}

TEST_CASE("eigensolver on a known diagonal matrix") {
  const int n = 200;
  std::vector<Eigen::Triplet<double>> t;
  for (int i = 0; i < n; ++i) t.emplace_back(i, i, -0.01 * i);
  // 2x2 block with eigenvalues 0.3 +- 0.2i
  t.emplace_back(0, 0, 0.3);
  t.emplace_back(0, 1, -0.2);
  t.emplace_back(1, 0, 0.2);
  t.emplace_back(1, 1, 0.3 + 0.01);
  Eigen::SparseMatrix<double> A(n, n);
  A.setFromTriplets(t.begin(), t.end());
  auto e = rightmost_eigenvalues(A, {.k = 4}, -1.0);
  REQUIRE(e.size() == 4);
  CHECK(e[0].lambda.real() == doctest::Approx(0.3).epsilon(1e-10));
  CHECK(std::abs(e[0].lambda.imag()) == doctest::Approx(0.2).epsilon(1e-10));
  CHECK(std::abs(e[1].lambda - std::conj(e[0].lambda)) < 1e-10);
  CHECK(e[2].lambda.real() == doctest::Approx(-0.02).epsilon(1e-10));
  for (const auto& x : e) CHECK(x.residual <= 1e-8);
}

TEST_CASE("spectrum of the unstable spot") {
  auto prof = solved(ProfileKind::Spot, kSpot, {5.66});
  auto s = direct_spectrum(prof, 0, 12, {.k = 3, .keepVectors = true});
  const auto& t = s.at(1).eigs.front();
  CHECK(std::abs(t.lambda) <= 5e-3);
  CHECK(translation_overlap(prof, t.vector) >= 0.99);
  std::vector<int> band;
  for (const auto& m : s.modes)
    if (m.max_real() > 0.0) band.push_back(m.l);
  REQUIRE(!band.empty());
  CHECK(band.front() >= 2);
  CHECK(band.back() <= 12);
  CHECK(band.back() - band.front() + 1 == static_cast<int>(band.size()));
  CHECK(s.at(-5).l == 5);
  CHECK_THROWS_AS(s.at(13), Error);
}

TEST_CASE("stable spot at a = 2.55") {
  ModelParams p = kSpot;
  p.a = 2.55;
  auto prof = solved(ProfileKind::Spot, p, {1.3});
  auto s = direct_spectrum(prof, 0, 12, {.k = 2});
  int arg = -1;
  double best = -INFINITY;
  for (const auto& m : s.modes)
    if (m.max_real() > best) {
      best = m.max_real();
      arg = m.l;
    }
  CHECK(best <= 5e-3);
  CHECK(arg == 1);
}

TEST_CASE("eigenvalue grid convergence") {
  double lam[3];
  const int ns[3] = {1601, 3201, 6401};
  for (int i = 0; i < 3; ++i) {
    auto prof = solved(ProfileKind::Spot, kSpot, {5.66}, ns[i]);
    lam[i] = rightmost_eigenvalues(stability_matrix(prof, 5), {.k = 1}, -0.5)[0].lambda.real();
  }
  const double ratio = (lam[0] - lam[1]) / (lam[1] - lam[2]);
  CHECK(ratio >= 3.5);
  CHECK(ratio <= 4.5);
}

TEST_CASE("slow eigenfunction ratio against Bessel functions") {
  const double c = 0.7, k = std::sqrt(1.0 + c), rI = 5.0;
  auto f = [c](double) { return c; };
  for (int l : {0, 1, 3, 10, 40})
    CHECK(slow_eigenfunction_ratio(l, f, rI) ==
          doctest::Approx(k * bessel::bessel_i_ratio(l, k * rI)).epsilon(1e-8));
  // Oscillatory potential: w passes through poles and the direct shot takes over.
  auto g = [](double) { return -5.0; };
  for (int l : {0, 2, 5}) CHECK(slow_eigenfunction_ratio(l, g, rI) == doctest::Approx(j_ratio(l, 2.0, rI)).epsilon(1e-7));
}

TEST_CASE("slow eigenfunction on the core trajectory") {
  const double rI = 5.686;
  auto bg = core_background(rI, kSpot);
  CHECK(bg.r_end() == doctest::Approx(rI).epsilon(1e-8));
  CHECK(bg.u(rI) == doctest::Approx(u_front(kSpot)).epsilon(1e-8));

  // u_+' solves the l = 1 problem.
  const double u = bg.u(rI), up = bg.du(rI), vp = v_plus(u, kSpot);
  const double upp = u - kSpot.a + u * vp * vp - up / rI;
  CHECK(slow_eigenfunction_ratio(1, bg, rI, kSpot) == doctest::Approx(upp / up).epsilon(1e-3));

  const double r40 = slow_eigenfunction_ratio(40, bg, rI, kSpot);
  CHECK(std::abs(r40 / (40.0 / rI) - 1.0) < 0.05);

  for (int l : {0, 2, 7}) {
    const double a = slow_eigenfunction_ratio(l, bg, rI, kSpot, {.eps = 1e-4});
    const double b = slow_eigenfunction_ratio(l, bg, rI, kSpot, {.eps = 5e-5});
    CHECK(std::abs(a - b) < 1e-8);
  }
}

TEST_CASE("slow potential is the derivative of u v_+^2") {
  const ModelParams p{2.7, 1.3, 0.4, 0.05};
  for (double u : {2.2, 2.6, 3.5}) {
    auto g = [&](double x) {
      const double v = v_plus(x, p);
      return x * v * v;
    };
    const double h = 1e-5;
    CHECK(slow_potential_term(u, p) == doctest::Approx((g(u + h) - g(u - h)) / (2 * h)).epsilon(1e-7));
  }
}

TEST_CASE("asymptotic lambda_1") {
  CHECK(stationary_layer_quotient(kSpot) == doctest::Approx(0.942809).epsilon(1e-6));
  const double rI = 5.686;
  const double plateau = lambda1_plateau(rI, kSpot);
  CHECK(plateau > 0.0);
  CHECK(plateau == doctest::Approx(0.385).epsilon(0.01));

  CHECK(lambda1_large_radius(1, rI, kSpot).lambda1 == 0.0);
  CHECK(lambda1_large_radius(0, rI, kSpot).lambda1 < 0.0);
  CHECK(lambda1_large_radius(4, rI, kSpot).regime == LambdaRegime::LargeRadius);

  auto sd = lambda1_sqrt_delta(1.0, rI, kSpot);
  CHECK(sd.criticalLbar == doctest::Approx(3.5).epsilon(0.03));
  CHECK(lambda1_sqrt_delta(sd.criticalLbar, rI, kSpot).lambda1 == doctest::Approx(0.0).epsilon(1e-12));

  auto bg = core_background(rI, kSpot);
  const double far = lambda1_formula(64, rI, kSpot, slow_eigenfunction_ratio(64, bg, rI, kSpot)).lambda1;
  CHECK(far > 0.0);
  CHECK(std::abs(far / plateau - 1.0) < 0.3);
  for (int l = 2; l <= 8; ++l)
    CHECK(lambda1_formula(l, rI, kSpot, slow_eigenfunction_ratio(l, bg, rI, kSpot)).lambda1 > 0.0);

  for (int l : {4, 5}) {
    const double f = lambda1_formula(l, rI, kSpot, slow_eigenfunction_ratio(l, bg, rI, kSpot)).lambda1;
    CHECK(std::abs(lambda1_large_radius(l, rI, kSpot).lambda1 / f - 1.0) <= 0.3);
  }

  const double pole = bessel::bessel_k_ratio(3, rI);
  CHECK_THROWS_AS(lambda1_formula(3, rI, kSpot, pole), Error);
  CHECK(to_string(LambdaRegime::SqrtDeltaScaling) == "sqrt_delta");
}
