#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "svg.hpp"
#include "vegspot/errors.hpp"
#include "vegspot/io.hpp"
#include "vegspot/model_core.hpp"
#include "vegspot/radial_bvp.hpp"
#include "vegspot/sim2d.hpp"
#include "vegspot/singular_geometry.hpp"
#include "vegspot/spectral.hpp"

namespace fs = std::filesystem;
using namespace vegspot;
using io::json;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

json params_json(const ModelParams& p) {
  return {{"a", p.a}, {"b", p.b}, {"m", p.m}, {"delta", p.delta}};
}

// Parameter checks count as flag validation (exit 1), not numerical failure.
void check_params(const ModelParams& p) {
  try {
    validate(p);
  } catch (const Error& e) {
    throw CLI::ValidationError("parameters", e.what());
  }
}

void add_params(CLI::App* c, ModelParams& p, bool withDelta) {
  c->add_option("--a", p.a, "Rainfall a")->required();
  c->add_option("--b", p.b, "Inverse carrying capacity b")->capture_default_str();
  c->add_option("--m", p.m, "Mortality m")->capture_default_str();
  if (withDelta) c->add_option("--delta", p.delta, "Diffusion ratio delta")->capture_default_str();
}

std::string class_name(int code) {
  static const char* names[] = {"inadmissible", "spot", "gap", "boundary"};
  return names[code];
}

// ---- regions ----

struct RegionsArgs {
  double b = 1.0, m = 0.5;
  double amMin = 4.0, amMax = 8.0, bMin = 0.3, bMax = 3.0;
  int samples = 100;
  fs::path out = ".";
};

void cmd_regions(const RegionsArgs& A) {
  const auto t0 = Clock::now();
  fs::create_directories(A.out);
  if (A.samples < 2) throw domain_error("--samples must be at least 2");
  svg::Raster R;
  R.title = "Admissible window and spot/gap classification (m = " + io::fmt17(A.m) + ")";
  R.xlabel = "a/m";
  R.ylabel = "b";
  R.x0 = A.amMin;
  R.x1 = A.amMax;
  R.y0 = A.bMin;
  R.y1 = A.bMax;
  R.palette = {"#eeeeee", "#2ca02c", "#d2b48c", "#000000"};
  R.legend = {"inadmissible", "spot", "gap", "boundary"};
  io::CsvWriter csv(A.out / "regions.csv", {"a_over_m", "b", "admissible", "class"});
  for (int j = 0; j < A.samples; ++j) {
    const double b = A.bMin + (A.bMax - A.bMin) * (j + 0.5) / A.samples;
    std::vector<int> row;
    for (int i = 0; i < A.samples; ++i) {
      const double am = A.amMin + (A.amMax - A.amMin) * (i + 0.5) / A.samples;
      const ModelParams p{am * A.m, b, A.m, 0.0};
      int code = 0;
      if (restriction_satisfied(p)) {
        switch (spot_gap_criterion(p).classification) {
          case Classification::Spot: code = 1; break;
          case Classification::Gap: code = 2; break;
          default: code = 3;
        }
      }
      row.push_back(code);
      csv.cell(am).cell(b).cell(code > 0 ? 1 : 0).cell(class_name(code));
      csv.end_row();
    }
    R.value.push_back(row);
  }
  R.write(A.out / "regions.svg");

  const auto [lo, hi] = admissible_a_window(A.b, A.m);
  json rowj = {{"b", A.b}, {"m", A.m}, {"empty", !(lo < hi)}};
  if (lo < hi) {
    rowj["aOverM"] = {lo / A.m, hi / A.m};
    rowj["a"] = {lo, hi};
    try {
      rowj["boundaryA"] = boundary_a(A.b, A.m);
    } catch (const Error& e) {
      rowj["boundaryA"] = nullptr;
      rowj["boundaryError"] = e.what();
    }
  }
  io::write_json(A.out / "row.json", rowj);
  std::cout << rowj.dump(2) << "\n";
  io::write_manifest(A.out, "regions",
                     {{"b", A.b}, {"m", A.m}, {"aOverMMin", A.amMin}, {"aOverMMax", A.amMax},
                      {"bMin", A.bMin}, {"bMax", A.bMax}, {"samples", A.samples}},
                     {{"boundaryTol", kBoundaryTol}}, {}, seconds_since(t0));
}

// ---- predict-radius ----

struct PredictArgs {
  ModelParams p{0.0, 1.0, 0.5, 0.0};
  fs::path out = ".";
};

void cmd_predict(const PredictArgs& A) {
  check_params(A.p);
  const auto t0 = Clock::now();
  fs::create_directories(A.out);
  const auto pr = predict_interface_radius(A.p);
  json j = {{"params", params_json(A.p)},
            {"kind", to_string(pr.kind)},
            {"rI", pr.rI},
            {"uStarIn", pr.uStarIn},
            {"pAtJump", pr.pAtJump},
            {"crossingResidual", pr.crossingResidual},
            {"transversality", pr.transversality},
            {"criterionMargin", pr.criterionMargin},
            {"converged", pr.converged}};
  io::write_json(A.out / "prediction.json", j);
  io::CsvWriter csv(A.out / "trajectory.csv", {"r", "u", "p"});
  svg::Series s;
  for (const auto& q : pr.core.samples) {
    csv.cell(q.r).cell(q.u).cell(q.p);
    csv.end_row();
    s.x.push_back(q.r);
    s.y.push_back(q.u);
  }
  svg::Chart c{"Slow trajectory on M+ (r_I = " + io::fmt17(pr.rI) + ")", "r", "u", {s}};
  c.write(A.out / "prediction.svg");
  std::cout << j.dump(2) << "\n";
  io::write_manifest(A.out, "predict-radius", params_json(A.p), {}, {}, seconds_since(t0));
}

// ---- solve ----

struct SolveArgs {
  ModelParams p{0.0, 1.0, 0.5, 0.05};
  std::string kind = "spot";
  std::vector<double> radii;
  double rMax = 0.0;
  int n = 0;
  double tol = 1e-9;
  fs::path out = ".";
};

void plot_profile(const RadialProfile& prof, const fs::path& path) {
  svg::Series u{{}, prof.u, "#1f77b4", "u"}, v{{}, prof.v, "#2ca02c", "v"};
  for (int i = 0; i < prof.grid.n; ++i) u.x.push_back(prof.grid.r(i));
  v.x = u.x;
  svg::Chart c{to_string(prof.kind) + " profile, a = " + io::fmt17(prof.params.a), "r", "u, v", {u, v}};
  c.write(path);
}

void cmd_solve(const SolveArgs& A) {
  check_params(A.p);
  const auto t0 = Clock::now();
  fs::create_directories(A.out);
  const ProfileKind kind = A.kind == "bare" ? ProfileKind::Other : profile_kind_from_string(A.kind);
  std::vector<double> radii = A.radii;
  if (radii.empty() && (kind == ProfileKind::Spot || kind == ProfileKind::Gap)) {
    const auto pr = predict_interface_radius({A.p.a, A.p.b, A.p.m, 0.0});
    radii = {pr.rI};
  }
  if (radii.empty() && kind != ProfileKind::Other)
    throw CLI::ValidationError("--radii", "ring and target solves need --radii");
  const double rOut = radii.empty() ? 0.0 : *std::max_element(radii.begin(), radii.end());
  const double rMax = A.rMax > 0.0 ? A.rMax : default_rmax(rOut);
  const RadialGrid g = A.n > 0 ? RadialGrid{rMax, A.n} : make_grid(rMax, A.p.delta);
  NewtonOptions no;
  no.tol = A.tol;
  const auto prof = solve_profile(initial_guess(kind, A.p, radii, g), no);
  write_profile(A.out / "profile.csv", prof);
  plot_profile(prof, A.out / "profile.svg");
  json j = {{"kind", to_string(prof.kind)},
            {"interfaces", prof.interfaces},
            {"residualNorm", prof.residualNorm},
            {"newtonIterations", prof.residualHistory.size()}};
  std::cout << j.dump(2) << "\n";
  io::write_manifest(A.out, "solve",
                     {{"params", params_json(A.p)}, {"kind", A.kind}, {"guessRadii", radii}, {"rMax", g.rMax}, {"n", g.n}},
                     {{"newtonTol", A.tol}}, {}, seconds_since(t0));
}

// ---- spectrum ----

struct SpectrumArgs {
  fs::path profile;
  int lmin = 0, lmax = 12;
  SpectrumOptions opt;
  fs::path out = ".";
};

void cmd_spectrum(const SpectrumArgs& A) {
  const auto t0 = Clock::now();
  fs::create_directories(A.out);
  const auto prof = read_profile(A.profile);
  const auto s = direct_spectrum(prof, A.lmin, A.lmax, A.opt);
  const double delta = prof.params.delta;

  io::CsvWriter top(A.out / "spectrum.csv", {"l", "re_lambda", "im_lambda", "residual"});
  io::CsvWriter all(A.out / "eigenvalues.csv", {"l", "index", "re_lambda", "im_lambda", "residual", "re_lambda_over_delta"});
  svg::Series direct{{}, {}, "#d62728", "direct", true};
  json rightmost = json::array();
  for (int l = -A.lmax; l <= A.lmax; ++l) {
    if (std::abs(l) < A.lmin) continue;
    const auto& ms = s.at(l);
    if (ms.eigs.empty()) {
      top.cell(l).cell(NAN).cell(NAN).cell(NAN);
    } else {
      const auto& e = ms.eigs.front();
      top.cell(l).cell(e.lambda.real()).cell(e.lambda.imag()).cell(e.residual);
      direct.x.push_back(l);
      direct.y.push_back(e.lambda.real());
    }
    top.end_row();
  }
  for (const auto& ms : s.modes) {
    for (std::size_t k = 0; k < ms.eigs.size(); ++k) {
      const auto& e = ms.eigs[k];
      all.cell(ms.l).cell(static_cast<long long>(k)).cell(e.lambda.real()).cell(e.lambda.imag()).cell(e.residual).cell(e.lambda.real() / delta);
      all.end_row();
    }
    rightmost.push_back({{"l", ms.l}, {"maxRe", ms.eigs.empty() ? json(nullptr) : json(ms.max_real())}});
  }

  std::vector<svg::Series> series{direct};
  json asym = nullptr;
  if (prof.kind == ProfileKind::Spot && prof.interfaces.size() == 1) {
    const double rI = prof.interfaces[0];
    io::CsvWriter tab(A.out / "asymptotic.csv", {"l", "lambda1", "regime"});
    svg::Series formula{{}, {}, "#1f77b4", "delta * lambda_1"};
    try {
      const auto bg = core_background(rI, prof.params);
      for (int l = A.lmin; l <= A.lmax; ++l) {
        try {
          const auto a = lambda1_formula(l, rI, prof.params, slow_eigenfunction_ratio(l, bg, rI, prof.params));
          tab.cell(l).cell(a.lambda1).cell(to_string(a.regime));
          tab.end_row();
          formula.x.push_back(l);
          formula.y.push_back(delta * a.lambda1);
        } catch (const Error& e) {
          std::cerr << "l = " << l << ": " << e.what() << "\n";
        }
        const auto lr = lambda1_large_radius(l, rI, prof.params);
        tab.cell(l).cell(lr.lambda1).cell(to_string(lr.regime));
        tab.end_row();
      }
      svg::Series mirrored = formula;
      mirrored.x.clear();
      mirrored.y.clear();
      for (std::size_t k = formula.x.size(); k-- > 0;)
        if (formula.x[k] > 0) {
          mirrored.x.push_back(-formula.x[k]);
          mirrored.y.push_back(formula.y[k]);
        }
      mirrored.x.insert(mirrored.x.end(), formula.x.begin(), formula.x.end());
      mirrored.y.insert(mirrored.y.end(), formula.y.begin(), formula.y.end());
      series.push_back(mirrored);
      asym = {{"rI", rI}, {"plateau", lambda1_plateau(rI, prof.params)}, {"layerQuotient", stationary_layer_quotient(prof.params)}};
    } catch (const Error& e) {
      std::cerr << "asymptotic table skipped: " << e.what() << "\n";
    }
  }
  svg::Chart c{"Rightmost eigenvalue per wavenumber", "l", "Re lambda", series, true};
  c.write(A.out / "spectrum.svg");

  json j = {{"profile", A.profile.string()},
            {"profileHash", io::file_hash(A.profile)},
            {"params", params_json(prof.params)},
            {"essSpecBound", s.essSpecBound},
            {"rightmost", rightmost},
            {"asymptotic", asym}};
  io::write_json(A.out / "spectrum.json", j);
  std::cout << "max Re lambda by |l|:";
  for (const auto& ms : s.modes) std::cout << " " << ms.l << ":" << (ms.eigs.empty() ? NAN : ms.max_real());
  std::cout << "\n";
  io::write_manifest(A.out, "spectrum",
                     {{"lmin", A.lmin}, {"lmax", A.lmax}, {"k", A.opt.k}, {"shift", A.opt.shift}, {"krylov", A.opt.krylov}},
                     {{"eigTol", A.opt.tol}}, {A.profile}, seconds_since(t0));
}

// ---- front ----

struct FrontArgs {
  ModelParams p{0.0, 1.0, 0.5, 0.05};
  std::string direction = "dv";
  double slowLength = 15.0;
  fs::path out = ".";
};

void cmd_front(const FrontArgs& A) {
  check_params(A.p);
  const auto t0 = Clock::now();
  fs::create_directories(A.out);
  FrontOptions o;
  o.direction = A.direction == "dv" ? Direction::DesertToVeg : Direction::VegToDesert;
  o.slowLength = A.slowLength;
  const auto f = solve_traveling_front(A.p, o);
  json j = {{"params", params_json(A.p)},
            {"direction", A.direction},
            {"c", f.speed},
            {"uStar", f.uStar},
            {"singularSpeed", f.singularSpeed},
            {"residual", f.residual},
            {"iterations", f.iterations}};
  io::write_json(A.out / "front.json", j);
  io::CsvWriter csv(A.out / "front.csv", {"xi", "u", "v"});
  for (std::size_t k = 0; k < f.xi.size(); ++k) {
    csv.cell(f.xi[k]).cell(f.u[k]).cell(f.v[k]);
    csv.end_row();
  }
  svg::Chart c{"Traveling front, c = " + io::fmt17(f.speed), "xi", "u, v",
               {{f.xi, f.u, "#1f77b4", "u"}, {f.xi, f.v, "#2ca02c", "v"}}};
  c.write(A.out / "front.svg");
  std::cout << j.dump(2) << "\n";
  io::write_manifest(A.out, "front", {{"params", params_json(A.p)}, {"direction", A.direction}, {"slowLength", A.slowLength}},
                     {{"newtonTol", o.tol}}, {}, seconds_since(t0));
}

// ---- simulate ----

struct SimulateArgs {
  fs::path profile;
  ModelParams p{0.0, 1.0, 0.5, 0.05};
  int n = 512;
  double L = 0.0;
  double dt = 0.1, tEnd = 100.0, snapEvery = 10.0, noise = 1e-3, level = 0.0, linearFraction = 0.05, fitFrom = 0.0;
  std::uint64_t seed = 1;
  fs::path out = ".";
};

void cmd_simulate(const SimulateArgs& A) {
  const auto t0 = Clock::now();
  fs::create_directories(A.out);
  Field2D f;
  std::vector<fs::path> inputs;
  double level = A.level;
  if (!A.profile.empty()) {
    const auto prof = read_profile(A.profile);
    inputs.push_back(A.profile);
    const double L = A.L > 0.0 ? A.L : A.n * prof.params.delta / 3.0;
    f = embed_radial(prof, A.n, L, A.noise, A.seed);
    if (!(level > 0.0)) level = 0.5 * *std::max_element(prof.v.begin(), prof.v.end());
  } else {
    if (!(A.p.a > 0.0)) throw CLI::ValidationError("--a", "homogeneous runs need --a (or pass --profile)");
    check_params(A.p);
    const auto eq = equilibria(A.p);
    if (!eq.P2) throw domain_error("no vegetated equilibrium at these parameters");
    const double L = A.L > 0.0 ? A.L : A.n * A.p.delta / 3.0;
    f = homogeneous_field(A.p, A.n, L, eq.P2->u, eq.P2->v);
  }

  RunOptions ro;
  ro.step.dt = A.dt;
  ro.outDir = A.out / "snapshots";
  ro.seed = A.seed;
  std::vector<InterfaceDiagnostics> diag;
  io::CsvWriter csv(A.out / "diagnostics.csv", {"t", "l", "amp"});
  io::CsvWriter star(A.out / "star_shape.csv", {"t", "star_shaped", "cx", "cy"});
  std::optional<double> onset;
  const Field2D last = run(f, A.tEnd, A.snapEvery, ro, [&](const Field2D& g) {
    if (A.profile.empty()) return;
    auto d = interface_diagnostics(g, {.level = level});
    star.cell(d.t).cell(d.starShaped ? 1 : 0).cell(d.cx).cell(d.cy);
    star.end_row();
    if (!d.starShaped && !onset) onset = d.t;
    for (std::size_t l = 0; l < d.amp.size(); ++l) {
      csv.cell(d.t).cell(static_cast<long long>(l)).cell(d.amp[l]);
      csv.end_row();
    }
    diag.push_back(std::move(d));
  });

  json summary = {{"n", f.n}, {"L", f.L}, {"tEnd", last.t}, {"seed", A.seed}, {"level", level}};
  summary["fingeringOnset"] = onset ? json(*onset) : json(nullptr);
  if (!diag.empty()) {
    try {
      io::CsvWriter g(A.out / "growth.csv", {"l", "rate", "stderr", "samples"});
      for (const auto& fit : growth_rates(diag, A.linearFraction, A.fitFrom)) {
        g.cell(fit.l).cell(fit.rate).cell(fit.stderr_).cell(fit.samples);
        g.end_row();
      }
    } catch (const Error& e) {
      summary["growthFit"] = e.what();
    }
    std::vector<svg::Series> ss;
    static const char* colors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2"};
    for (int l = 2; l <= 8; ++l) {
      svg::Series s{{}, {}, colors[l - 2], "l = " + std::to_string(l)};
      for (const auto& d : diag)
        if (d.starShaped) {
          s.x.push_back(d.t);
          s.y.push_back(std::log10(std::max(d.amp[static_cast<std::size_t>(l)], 1e-300)));
        }
      ss.push_back(s);
    }
    svg::Chart{"Interface mode amplitudes", "t", "log10 |rho_l|", ss}.write(A.out / "modes.svg");
  }
  io::write_json(A.out / "simulate.json", summary);
  std::cout << summary.dump(2) << "\n";
  io::write_manifest(A.out, "simulate",
                     {{"params", params_json(f.params)}, {"n", f.n}, {"L", f.L}, {"dt", A.dt}, {"tEnd", A.tEnd},
                      {"snapEvery", A.snapEvery}, {"noise", A.noise}, {"seed", A.seed}},
                     {{"reactionCfl", ro.step.reactionCfl}, {"linearFraction", A.linearFraction}}, inputs,
                     seconds_since(t0));
}

// ---- continue ----

struct ContinueArgs {
  fs::path profile;
  double aTarget = 0.0;
  ContinuationOptions opt;
  fs::path out = ".";
};

void cmd_continue(const ContinueArgs& A) {
  const auto t0 = Clock::now();
  fs::create_directories(A.out);
  const auto start = read_profile(A.profile);
  const auto branch = continue_in_a(start, A.aTarget, A.opt);
  std::vector<std::string> header{"a", "residual", "kind"};
  const std::size_t ni = start.interfaces.size();
  for (std::size_t k = 0; k < ni; ++k) header.push_back("r" + std::to_string(k + 1));
  io::CsvWriter csv(A.out / "branch.csv", header);
  std::vector<svg::Series> ss(ni);
  for (const auto& p : branch) {
    csv.cell(p.params.a).cell(p.residualNorm).cell(to_string(p.kind));
    for (std::size_t k = 0; k < ni; ++k) {
      const double r = k < p.interfaces.size() ? p.interfaces[k] : NAN;
      csv.cell(r);
      ss[k].x.push_back(p.params.a);
      ss[k].y.push_back(r);
    }
    csv.end_row();
  }
  for (std::size_t k = 0; k < ni; ++k) ss[k].label = "r" + std::to_string(k + 1);
  svg::Chart{"Continuation in a", "a", "interface radius", ss}.write(A.out / "branch.svg");
  write_profile(A.out / "end_profile.csv", branch.back());
  std::cout << "continued to a = " << io::fmt17(branch.back().params.a) << " in " << branch.size() - 1 << " steps\n";
  io::write_manifest(A.out, "continue",
                     {{"aTarget", A.aTarget}, {"step", A.opt.step}, {"minStep", A.opt.minStep}, {"maxStep", A.opt.maxStep},
                      {"stopRadiusFraction", A.opt.stopRadiusFraction}},
                     {}, {A.profile}, seconds_since(t0));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Radially symmetric vegetation patterns: existence, spectra and simulation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", VEGSPOT_VERSION);

  RegionsArgs ra;
  auto* reg = app.add_subcommand("regions", "Parameter window and spot/gap classification raster");
  reg->add_option("--b", ra.b, "b for the reported row")->capture_default_str();
  reg->add_option("--m", ra.m, "m (fixed)")->capture_default_str();
  reg->add_option("--a-min", ra.amMin, "Smallest a/m")->capture_default_str();
  reg->add_option("--a-max", ra.amMax, "Largest a/m")->capture_default_str();
  reg->add_option("--b-min", ra.bMin)->capture_default_str();
  reg->add_option("--b-max", ra.bMax)->capture_default_str();
  reg->add_option("--samples", ra.samples, "Cells per axis")->capture_default_str()->check(CLI::Range(2, 100000));
  reg->add_option("--out", ra.out)->capture_default_str();

  PredictArgs pa;
  auto* pred = app.add_subcommand("predict-radius", "Singular interface radius of the spot or gap");
  add_params(pred, pa.p, false);
  pred->add_option("--out", pa.out)->capture_default_str();

  SolveArgs sa;
  auto* sol = app.add_subcommand("solve", "Radial profile by Newton's method");
  add_params(sol, sa.p, true);
  sol->add_option("--kind", sa.kind)->capture_default_str()->check(CLI::IsMember({"spot", "gap", "ring", "target", "bare"}));
  sol->add_option("--radii", sa.radii, "Interface radii of the initial guess");
  sol->add_option("--rmax", sa.rMax, "Truncation radius (default max(20, 3 r))");
  sol->add_option("--n", sa.n, "Grid nodes (default: h <= delta/4)");
  sol->add_option("--tol", sa.tol)->capture_default_str();
  sol->add_option("--out", sa.out)->capture_default_str();

  SpectrumArgs spa;
  auto* spe = app.add_subcommand("spectrum", "Direct eigenvalues per angular wavenumber");
  spe->add_option("--profile", spa.profile, "profile.csv written by solve")->required()->check(CLI::ExistingFile);
  spe->add_option("--lmin", spa.lmin)->capture_default_str()->check(CLI::NonNegativeNumber);
  spe->add_option("--lmax", spa.lmax)->capture_default_str()->check(CLI::NonNegativeNumber);
  spe->add_option("--k", spa.opt.k, "Eigenvalues per wavenumber")->capture_default_str()->check(CLI::PositiveNumber);
  spe->add_option("--shift", spa.opt.shift)->capture_default_str();
  spe->add_option("--krylov", spa.opt.krylov)->capture_default_str()->check(CLI::Range(4, 10000));
  spe->add_option("--out", spa.out)->capture_default_str();

  FrontArgs fa;
  auto* fro = app.add_subcommand("front", "Planar traveling front and its speed");
  add_params(fro, fa.p, true);
  fro->add_option("--direction", fa.direction, "dv (desert invaded) or vd")->capture_default_str()->check(CLI::IsMember({"dv", "vd"}));
  fro->add_option("--slow-length", fa.slowLength)->capture_default_str();
  fro->add_option("--out", fa.out)->capture_default_str();

  SimulateArgs ma;
  auto* sim = app.add_subcommand("simulate", "2D periodic simulation from a radial profile or the vegetated state");
  sim->add_option("--profile", ma.profile, "profile.csv to embed")->check(CLI::ExistingFile);
  sim->add_option("--a", ma.p.a, "Rainfall for a homogeneous run");
  sim->add_option("--b", ma.p.b)->capture_default_str();
  sim->add_option("--m", ma.p.m)->capture_default_str();
  sim->add_option("--delta", ma.p.delta)->capture_default_str();
  sim->add_option("--n", ma.n)->capture_default_str();
  sim->add_option("--L", ma.L, "Domain length (default n delta / 3)");
  sim->add_option("--dt", ma.dt)->capture_default_str()->check(CLI::PositiveNumber);
  sim->add_option("--t-end", ma.tEnd)->capture_default_str()->check(CLI::PositiveNumber);
  sim->add_option("--snap-every", ma.snapEvery)->capture_default_str()->check(CLI::PositiveNumber);
  sim->add_option("--noise", ma.noise)->capture_default_str()->check(CLI::NonNegativeNumber);
  sim->add_option("--seed", ma.seed)->capture_default_str();
  sim->add_option("--level", ma.level, "v level of the interface (default half the profile maximum)");
  sim->add_option("--linear-fraction", ma.linearFraction)->capture_default_str();
  sim->add_option("--fit-from", ma.fitFrom, "Ignore snapshots before this time in growth fits")->capture_default_str();
  sim->add_option("--out", ma.out)->capture_default_str();

  ContinueArgs ca;
  auto* con = app.add_subcommand("continue", "Continue a profile in a");
  con->add_option("--profile", ca.profile)->required()->check(CLI::ExistingFile);
  con->add_option("--a-target", ca.aTarget)->required();
  con->add_option("--step", ca.opt.step)->capture_default_str();
  con->add_option("--min-step", ca.opt.minStep)->capture_default_str();
  con->add_option("--max-step", ca.opt.maxStep)->capture_default_str();
  con->add_option("--stop-radius-fraction", ca.opt.stopRadiusFraction)->capture_default_str();
  con->add_option("--out", ca.out)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n";
    CLI::App* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
    std::cerr << sub->help();
    return 1;
  }

  try {
    if (*reg) cmd_regions(ra);
    else if (*pred) cmd_predict(pa);
    else if (*sol) cmd_solve(sa);
    else if (*spe) cmd_spectrum(spa);
    else if (*fro) cmd_front(fa);
    else if (*sim) cmd_simulate(ma);
    else if (*con) cmd_continue(ca);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    // Rejected inputs rather than failed numerics.
    return e.kind() == "BadRadii" || e.kind() == "DomainTooSmall" ? 1 : 2;
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }
  return 0;
}
