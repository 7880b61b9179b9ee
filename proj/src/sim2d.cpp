#include "vegspot/sim2d.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include <fftw3.h>

#include "vegspot/errors.hpp"
#include "vegspot/io.hpp"
#include "vegspot/parallel.hpp"

namespace vegspot {

struct Integrator::Impl {
  int n;
  double L, delta;
  int nc;  // complex columns n/2 + 1
  double* real = nullptr;
  fftw_complex* spec = nullptr;
  fftw_plan fwd = nullptr, bwd = nullptr;
  std::vector<double> lap;  // symbol of the isotropic 9-point Laplacian on the half spectrum
  double cachedTau[2] = {NAN, NAN};
  std::vector<double> mult[2][2];  // [slot][field]

  Impl(int n_, double L_, double d_) : n(n_), L(L_), delta(d_), nc(n_ / 2 + 1) {
    real = fftw_alloc_real(static_cast<std::size_t>(n) * n);
    spec = fftw_alloc_complex(static_cast<std::size_t>(n) * nc);
    fwd = fftw_plan_dft_r2c_2d(n, n, real, spec, FFTW_ESTIMATE);
    bwd = fftw_plan_dft_c2r_2d(n, n, spec, real, FFTW_ESTIMATE);
    // Weights 4/6 on edges, 1/6 on corners, -20/6 at the centre.
    const double h = L / n;
    lap.resize(static_cast<std::size_t>(n) * nc);
    for (int ky = 0; ky < n; ++ky) {
      const double cy = std::cos(2.0 * std::numbers::pi * ky / n);
      for (int kx = 0; kx < nc; ++kx) {
        const double cx = std::cos(2.0 * std::numbers::pi * kx / n);
        lap[static_cast<std::size_t>(ky) * nc + kx] =
            (8.0 * (cx + cy) + 4.0 * cx * cy - 20.0) / (6.0 * h * h);
      }
    }
  }
  ~Impl() {
    fftw_destroy_plan(fwd);
    fftw_destroy_plan(bwd);
    fftw_free(real);
    fftw_free(spec);
  }

  const std::vector<double>& multiplier(double tau, int field) {
    int slot = tau == cachedTau[0] ? 0 : tau == cachedTau[1] ? 1 : -1;
    if (slot < 0) {
      slot = std::isnan(cachedTau[0]) ? 0 : 1;
      if (slot == 1 && !std::isnan(cachedTau[1])) {
        std::swap(cachedTau[0], cachedTau[1]);
        std::swap(mult[0], mult[1]);
      }
      cachedTau[slot] = tau;
      const double norm = 1.0 / (static_cast<double>(n) * n);
      for (int f = 0; f < 2; ++f) {
        const double d = f == 0 ? 1.0 : delta * delta;
        auto& m = mult[slot][f];
        m.resize(lap.size());
        for (std::size_t k = 0; k < lap.size(); ++k) m[k] = std::exp(tau * d * lap[k]) * norm;
      }
    }
    return mult[slot][field];
  }

  void diffuse(std::vector<double>& x, double tau, int field) {
    const auto& m = multiplier(tau, field);
    std::copy(x.begin(), x.end(), real);
    fftw_execute(fwd);
    for (std::size_t k = 0; k < m.size(); ++k) {
      spec[k][0] *= m[k];
      spec[k][1] *= m[k];
    }
    fftw_execute(bwd);
    std::copy(real, real + x.size(), x.begin());
  }
};

Integrator::Integrator(int n, double L, double delta, StepOptions opt) : opt_(std::move(opt)) {
  if (n < 4 || n % 2 != 0) throw domain_error("grid size must be even and at least 4");
  if (!(L > 0.0) || !(delta > 0.0)) throw domain_error("L and delta must be positive");
  if (!(opt_.dt > 0.0)) throw domain_error("dt must be positive");
  if (L / n > delta / 3.0 * (1.0 + 1e-12)) throw Error("GridTooCoarse", "grid spacing exceeds delta/3");
  impl_ = std::make_unique<Impl>(n, L, delta);
}

Integrator::~Integrator() = default;

void Integrator::diffuse(std::vector<double>& x, double tau, bool slowField) const {
  if (x.size() != static_cast<std::size_t>(impl_->n) * impl_->n) throw domain_error("field size mismatch");
  impl_->diffuse(x, tau, slowField ? 1 : 0);
}

namespace {

double reaction_spectral_radius(const Field2D& f) {
  const auto& p = f.params;
  double rho = 0.0;
  for (std::size_t k = 0; k < f.u.size(); ++k) {
    const double u = f.u[k], v = f.v[k];
    const double a11 = -1.0 - v * v, a12 = -2.0 * u * v;
    const double a21 = v * v * (1.0 - p.b * v), a22 = -p.m + u * (2.0 * v - 3.0 * p.b * v * v);
    const double tr = a11 + a22, det = a11 * a22 - a12 * a21;
    const double disc = 0.25 * tr * tr - det;
    const double r = disc >= 0.0 ? std::abs(0.5 * tr) + std::sqrt(disc) : std::sqrt(det);
    rho = std::max(rho, r);
  }
  return rho;
}

void react(Field2D& f, double tau, double cfl, const Forcing& forcing) {
  const auto& p = f.params;
  const double rho = reaction_spectral_radius(f);
  const int sub = std::max(1, static_cast<int>(std::ceil(tau * rho / cfl)));
  const double s = tau / sub;
  const int n = f.n;
  const double t0 = f.t;
  auto rhs = [&](double u, double v, double x, double y, double t, double& du, double& dv) {
    const double uv2 = u * v * v;
    du = p.a - u - uv2;
    dv = -p.m * v + uv2 * (1.0 - p.b * v);
    if (forcing) {
      const auto src = forcing(x, y, t);
      du += src[0];
      dv += src[1];
    }
  };
  parallel_for(static_cast<std::size_t>(n), [&](std::size_t row) {
    const int j = static_cast<int>(row);
    const double y = f.x(j);
    for (int i = 0; i < n; ++i) {
      const std::size_t k = static_cast<std::size_t>(j) * n + i;
      const double x = f.x(i);
      double u = f.u[k], v = f.v[k];
      for (int q = 0; q < sub; ++q) {
        const double t = t0 + q * s;
        double k1u, k1v, k2u, k2v;
        rhs(u, v, x, y, t, k1u, k1v);
        rhs(u + 0.5 * s * k1u, v + 0.5 * s * k1v, x, y, t + 0.5 * s, k2u, k2v);
        u += s * k2u;
        v += s * k2v;
      }
      f.u[k] = u;
      f.v[k] = v;
    }
  });
}

void check_finite(const Field2D& f) {
  for (std::size_t k = 0; k < f.u.size(); ++k)
    if (!(std::abs(f.u[k]) <= 1e6) || !(std::abs(f.v[k]) <= 1e6))
      throw Error("BlowUp", "field left [-1e6, 1e6] by t = " + io::fmt17(f.t));
}

}  // namespace

void Integrator::advance(Field2D& f, double duration) {
  if (f.n != impl_->n || f.L != impl_->L) throw domain_error("field does not match the integrator grid");
  if (!(duration > 0.0)) return;
  const long steps = std::max(1L, static_cast<long>(std::ceil(duration / opt_.dt - 1e-9)));
  const double tau = duration / static_cast<double>(steps);
  const double tEnd = f.t + duration;
  auto diffuse = [&](double dt) {
    impl_->diffuse(f.u, dt, 0);
    impl_->diffuse(f.v, dt, 1);
  };
  // Half diffusion steps of neighbouring Strang steps are merged.
  diffuse(0.5 * tau);
  for (long s = 0; s < steps; ++s) {
    react(f, tau, opt_.reactionCfl, opt_.forcing);
    f.t = s + 1 == steps ? tEnd : f.t + tau;
    diffuse(s + 1 == steps ? 0.5 * tau : tau);
  }
  check_finite(f);
}

Field2D step(const Field2D& f, double dt, const StepOptions& opt) {
  StepOptions o = opt;
  o.dt = dt;
  Integrator I(f.n, f.L, f.params.delta, o);
  Field2D g = f;
  I.advance(g, dt);
  return g;
}

Field2D homogeneous_field(const ModelParams& p, int n, double L, double u, double v) {
  Field2D f;
  f.n = n;
  f.L = L;
  f.params = p;
  f.u.assign(static_cast<std::size_t>(n) * n, u);
  f.v.assign(static_cast<std::size_t>(n) * n, v);
  return f;
}

Field2D embed_radial(const RadialProfile& prof, int n, double L, double noiseAmp, std::uint64_t seed) {
  double rOut = 0.0;
  for (double r : prof.interfaces) rOut = std::max(rOut, r);
  if (L < 2.5 * rOut)
    throw Error("DomainTooSmall", "L must be at least 2.5 times the outermost interface radius");
  Field2D f = homogeneous_field(prof.params, n, L, 0.0, 0.0);
  const auto& g = prof.grid;
  const double hr = g.h();
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const double r = std::hypot(f.x(i), f.x(j));
      const std::size_t k = static_cast<std::size_t>(j) * n + i;
      if (r >= g.rMax) {
        f.u[k] = prof.u.back();
        f.v[k] = prof.v.back();
        continue;
      }
      const int m = std::min(static_cast<int>(r / hr), g.n - 2);
      const double w = r / hr - m;
      f.u[k] = (1 - w) * prof.u[m] + w * prof.u[m + 1];
      f.v[k] = (1 - w) * prof.v[m] + w * prof.v[m + 1];
    }
  if (noiseAmp > 0.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    for (auto& v : f.v) v = std::max(0.0, v + noiseAmp * U(rng));
  }
  return f;
}

InterfaceDiagnostics interface_diagnostics(const Field2D& f, const InterfaceOptions& opt) {
  InterfaceDiagnostics d;
  d.t = f.t;
  const int n = f.n;
  const double h = f.h();
  double level = opt.level;
  if (!(level > 0.0)) level = 0.5 * *std::max_element(f.v.begin(), f.v.end());
  if (!(level > 0.0)) return d;

  // The patch is the minority phase: vegetation for a spot, bare ground for a gap.
  // Its centroid uses the smooth weight v (or 2 level - v), not a pixel count.
  long above = 0;
  for (double v : f.v) above += v > level;
  if (above == 0) return d;
  const bool patchAbove = 2 * above < static_cast<long>(f.v.size());
  double sx = 0.0, sy = 0.0, cnt = 0.0;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const double v = f.v[static_cast<std::size_t>(j) * n + i];
      const double w = patchAbove ? v : std::max(0.0, 2.0 * level - v);
      sx += w * f.x(i);
      sy += w * f.x(j);
      cnt += w;
    }
  if (!(cnt > 0.0)) return d;
  d.cx = sx / cnt;
  d.cy = sy / cnt;

  auto sample = [&](double x, double y) {
    const double gx = (x + 0.5 * f.L) / h, gy = (y + 0.5 * f.L) / h;
    const double fx = std::floor(gx), fy = std::floor(gy);
    const double wx = gx - fx, wy = gy - fy;
    auto idx = [n](double q) { return static_cast<std::size_t>(((static_cast<long>(q) % n) + n) % n); };
    const std::size_t i0 = idx(fx), i1 = idx(fx + 1), j0 = idx(fy), j1 = idx(fy + 1);
    return (1 - wy) * ((1 - wx) * f.v[j0 * n + i0] + wx * f.v[j0 * n + i1]) +
           wy * ((1 - wx) * f.v[j1 * n + i0] + wx * f.v[j1 * n + i1]);
  };

  const double ds = 0.25 * h, sMax = 0.5 * f.L - h;
  std::vector<double> rho(static_cast<std::size_t>(opt.angles));
  for (int k = 0; k < opt.angles; ++k) {
    const double th = 2.0 * std::numbers::pi * k / opt.angles;
    const double c = std::cos(th), s = std::sin(th);
    double prev = sample(d.cx, d.cy) - level;
    int crossings = 0;
    for (double r = ds; r <= sMax; r += ds) {
      const double cur = sample(d.cx + r * c, d.cy + r * s) - level;
      if ((prev > 0.0) != (cur > 0.0)) {
        ++crossings;
        rho[static_cast<std::size_t>(k)] = r - ds * cur / (cur - prev);
      }
      prev = cur;
    }
    if (crossings != 1) return d;
  }
  d.starShaped = true;
  d.rho = rho;
  d.amp.resize(static_cast<std::size_t>(opt.lmax) + 1);
  for (int l = 0; l <= opt.lmax; ++l) {
    std::complex<double> acc = 0.0;
    for (int k = 0; k < opt.angles; ++k)
      acc += rho[static_cast<std::size_t>(k)] *
             std::polar(1.0, -2.0 * std::numbers::pi * l * k / opt.angles);
    acc /= static_cast<double>(opt.angles);
    d.amp[static_cast<std::size_t>(l)] = (l == 0 ? 1.0 : 2.0) * std::abs(acc);
  }
  return d;
}

std::vector<GrowthFit> growth_rates(const std::vector<InterfaceDiagnostics>& diag, double linearFraction,
                                    double tMin) {
  std::vector<const InterfaceDiagnostics*> use;
  for (const auto& d : diag) {
    if (d.t < tMin) continue;
    if (!d.starShaped) break;
    bool linear = true;
    for (std::size_t l = 1; l < d.amp.size(); ++l) linear = linear && d.amp[l] < linearFraction * d.amp[0];
    if (!linear) break;
    use.push_back(&d);
  }
  if (use.size() < 5) throw Error("RegimeExceeded", "fewer than 5 snapshots in the linear window");
  const std::size_t lmax = use.front()->amp.size() - 1;
  const double N = static_cast<double>(use.size());
  double tm = 0.0;
  for (auto* d : use) tm += d->t / N;
  double sxx = 0.0;
  for (auto* d : use) sxx += (d->t - tm) * (d->t - tm);
  std::vector<GrowthFit> out;
  for (std::size_t l = 1; l <= lmax; ++l) {
    double ym = 0.0;
    for (auto* d : use) ym += std::log(std::max(d->amp[l], 1e-300)) / N;
    double sxy = 0.0;
    for (auto* d : use) sxy += (d->t - tm) * (std::log(std::max(d->amp[l], 1e-300)) - ym);
    const double slope = sxy / sxx;
    double ssr = 0.0;
    for (auto* d : use) {
      const double e = std::log(std::max(d->amp[l], 1e-300)) - ym - slope * (d->t - tm);
      ssr += e * e;
    }
    const double se = N > 2 ? std::sqrt(ssr / (N - 2.0) / sxx) : INFINITY;
    out.push_back({static_cast<int>(l), slope, se, static_cast<int>(use.size())});
  }
  return out;
}

namespace {

std::string time_tag(double t) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", t);
  return buf;
}

}  // namespace

void write_snapshot(const std::filesystem::path& dir, const Field2D& f) {
  std::filesystem::create_directories(dir);
  io::write_f64(dir / ("u_" + time_tag(f.t) + ".f64"), f.u);
  io::write_f64(dir / ("v_" + time_tag(f.t) + ".f64"), f.v);
}

Field2D run(const Field2D& initial, double tEnd, double snapEvery, const RunOptions& opt,
            const std::function<void(const Field2D&)>& observer) {
  if (!(snapEvery > 0.0)) throw domain_error("snapEvery must be positive");
  Integrator I(initial.n, initial.L, initial.params.delta, opt.step);
  Field2D f = initial;
  std::vector<double> times;
  auto snap = [&]() {
    if (observer) observer(f);
    if (!opt.outDir.empty()) write_snapshot(opt.outDir, f);
    times.push_back(f.t);
  };
  snap();
  const double t0 = initial.t;
  for (long k = 1;; ++k) {
    const double target = std::min(tEnd, t0 + k * snapEvery);
    if (target <= f.t) break;
    I.advance(f, target - f.t);
    f.t = target;
    snap();
    if (target >= tEnd) break;
  }
  if (!opt.outDir.empty()) {
    const auto& p = f.params;
    io::json m = {{"n", f.n},
                  {"L", f.L},
                  {"dt", opt.step.dt},
                  {"seed", opt.seed},
                  {"params", {{"a", p.a}, {"b", p.b}, {"m", p.m}, {"delta", p.delta}}},
                  {"times", times}};
    io::write_json(opt.outDir / "snapshots.json", m);
  }
  return f;
}

}  // namespace vegspot
