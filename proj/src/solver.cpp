#include "fbam/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "fbam/special.hpp"

namespace fbam {

namespace {
constexpr double kBlowup = 1e12;
constexpr int kHistoryQuadPoints = 256;  // sampled-history distributed term
}

double StateView::operator()(int i, long j) const {
  if (j < 0) return sys->history(offset + i, j * step);
  return data[(size_t)j * stride + offset + i];
}

void SolverConfig::validate(double mu) const {
  if (!(step > 0.0)) throw std::invalid_argument("SolverConfig: step must be positive");
  if (!(t_end > 0.0)) throw std::invalid_argument("SolverConfig: t_end must be positive");
  if (corrector_iterations < 1)
    throw std::invalid_argument("SolverConfig: corrector_iterations must be >= 1");
  if (step > mu)
    throw std::invalid_argument("SolverConfig: step must not exceed the neutral delay");
  const double ratio = mu / step;
  if (std::abs(ratio - std::llround(ratio)) > 1e-9 * std::max(1.0, ratio))
    throw std::invalid_argument(
        "SolverConfig: the neutral delay must be an integer multiple of the step");
  if (memory == Memory::Windowed && !(window > 0.0))
    throw std::invalid_argument("SolverConfig: windowed memory needs a positive window");
}

// ---------------------------------------------------------------------------
// Adams-Bashforth-Moulton stepper on the neutral combination

Trajectory integrate(const NeutralSystem& sys, double delta, double mu,
                     const SolverConfig& cfg) {
  if (!(delta > 0.0) || delta > 1.0)
    throw std::invalid_argument("integrate: delta must lie in (0, 1]");
  cfg.validate(mu);

  const int m = sys.dim();
  const double h = cfg.step;
  const long lag = std::llround(mu / h);
  const long N = (long)std::floor(cfg.t_end / h + 1e-9);

  Trajectory traj;
  traj.step = h;
  traj.cols = m;
  traj.times.resize(N + 1);
  traj.states.assign((size_t)(N + 1) * m, 0.0);
  traj.z_states.assign((size_t)(N + 1) * m, 0.0);
  std::vector<double> fmat((size_t)(N + 1) * m, 0.0);

  std::vector<double> z0(m), xw(m), zw(m), fcand(m);
  for (int i = 0; i < m; ++i) {
    const double x0 = sys.history(i, 0.0);
    traj.states[i] = x0;
    z0[i] = x0 - sys.neutral_coeff(i) * sys.history(i, -mu);
    traj.z_states[i] = z0[i];
  }
  StateView view{traj.states.data(), m, 0, &sys, h};
  sys.rhs(view, 0, traj.states.data(), fmat.data());

  // power tables for the product-rectangle / product-trapezoid weights
  std::vector<double> pd(N + 3), pd1(N + 3);
  for (long k = 0; k <= N + 2; ++k) {
    pd[k] = std::pow((double)k, delta);
    pd1[k] = std::pow((double)k, delta + 1.0);
  }
  const double wpred = std::pow(h, delta) * rgamma(delta + 1.0);
  const double wcorr = std::pow(h, delta) * rgamma(delta + 2.0);

  for (long n = 0; n < N; ++n) {
    traj.times[n + 1] = (n + 1) * h;

    // predictor
    for (int i = 0; i < m; ++i) {
      double s = 0.0;
      for (long j = 0; j <= n; ++j)
        s += (pd[n + 1 - j] - pd[n - j]) * fmat[(size_t)j * m + i];
      zw[i] = z0[i] + wpred * s;
    }
    std::vector<double> xlag(m);
    for (int i = 0; i < m; ++i) {
      xlag[i] = view(i, n + 1 - lag);
      xw[i] = zw[i] + sys.neutral_coeff(i) * xlag[i];
    }
    sys.rhs(view, n + 1, xw.data(), fcand.data());

    // corrector base: weighted history sum without the new point
    std::vector<double> base(m);
    for (int i = 0; i < m; ++i) {
      double s = (pd1[n] - (n - delta) * pd[n + 1]) * fmat[i];
      for (long j = 1; j <= n; ++j)
        s += (pd1[n - j + 2] + pd1[n - j] - 2.0 * pd1[n - j + 1]) *
             fmat[(size_t)j * m + i];
      base[i] = z0[i] + wcorr * s;
    }
    for (int sweep = 0; sweep < cfg.corrector_iterations; ++sweep) {
      for (int i = 0; i < m; ++i) {
        zw[i] = base[i] + wcorr * fcand[i];
        xw[i] = zw[i] + sys.neutral_coeff(i) * xlag[i];
      }
      sys.rhs(view, n + 1, xw.data(), fcand.data());
    }
    for (int i = 0; i < m; ++i) {
      if (!(std::abs(xw[i]) < kBlowup))
        throw numeric_blowup_error("integrate: state escaped at t = " +
                                   std::to_string((n + 1) * h));
      traj.states[(size_t)(n + 1) * m + i] = xw[i];
      traj.z_states[(size_t)(n + 1) * m + i] = zw[i];
      fmat[(size_t)(n + 1) * m + i] = fcand[i];
    }
  }
  return traj;
}

// ---------------------------------------------------------------------------
// Network right-hand side

BamEvaluator::BamEvaluator(const BamNetwork& net, double window)
    : net_(net), window_(window) {
  net_.validate();
}

// Distributed term \int_0^inf ker(w) g(state_comp(t - w)) dw at t = n*step:
// product integration of the kernel against the piecewise-linear interpolant
// of g along the grid (exact per interval for exponential kernels, so a
// constant g integrates to exactly g * mass and equilibria are stationary
// states of the discrete scheme too), plus the pre-history contribution.
// Table kernels fall back to the plain trapezoid.
double BamEvaluator::conv(const StateView& view, long n, const KernelSpec& ker,
                          int comp, bool layer2, double candidate_g) const {
  const double h = view.step;
  auto g_at = [&](long j) {
    const double v = view(comp, j);
    return layer2 ? net_.g_of_y(comp - net_.n1, v) : net_.g_bar_of_x(comp, v);
  };
  long jmin = 0;
  if (std::isfinite(window_))
    jmin = std::max(0L, n - (long)std::llround(window_ / h));

  double acc = 0.0;
  if (n > jmin) {
    if (ker.form == KernelSpec::Form::Exponential) {
      // over w in [ih, (i+1)h]: \int w e^{-rw} and \int e^{-rw} in closed
      // form; alpha weights the sample nearer to t, beta the farther one
      const double r = ker.rate;
      const double decay_h = std::exp(-r * h);
      const double mass_h = ker.weight * (1.0 - decay_h) / r;
      const double beta =
          ker.weight * ((1.0 - decay_h) / (r * r * h) - decay_h / r);
      const double alpha = mass_h - beta;
      double decay = 1.0, s = 0.0;
      for (long i = 0; i < n - jmin; ++i) {
        const double g_near = i == 0 ? candidate_g : g_at(n - i);
        s += decay * (alpha * g_near + beta * g_at(n - i - 1));
        decay *= decay_h;
      }
      acc = s;
    } else {
      double s = 0.5 * (ker.eval(0.0) * candidate_g +
                        ker.eval((n - jmin) * h) * g_at(jmin));
      for (long j = jmin + 1; j < n; ++j) s += ker.eval((n - j) * h) * g_at(j);
      acc = s * h;
    }
  }

  if (net_.convention == DelayConvention::InfiniteMemory && jmin == 0) {
    // w > n*h reaches into the history, supplied by the enclosing system so
    // that the same network evaluation serves coupled (drive/response)
    // integrations.  Sampled histories get their own trapezoid; the constant
    // part uses the exact kernel tail.
    const int full = view.offset + comp;
    const double t0 = n * h;
    const double extent = view.sys->history_extent(full);
    auto g_hist = [&](double s) {
      const double v = view.sys->history(full, -s);
      return layer2 ? net_.g_of_y(comp - net_.n1, v) : net_.g_bar_of_x(comp, v);
    };
    if (extent > 0.0) {
      const int M = kHistoryQuadPoints;
      const double ds = extent / M;
      double s = 0.5 * (ker.eval(t0) * g_hist(0.0) +
                        ker.eval(t0 + extent) * g_hist(extent));
      for (int i = 1; i < M; ++i) s += ker.eval(t0 + i * ds) * g_hist(i * ds);
      acc += s * ds;
      acc += g_hist(extent + 1.0) * tail_mass(ker, t0 + extent);
    } else {
      acc += g_hist(1.0) * tail_mass(ker, t0);
    }
  }
  return acc;
}

void BamEvaluator::eval(const StateView& view, long n, const double* x_n,
                        double* f) const {
  const int n1 = net_.n1, n2 = net_.n2;

  // memoized distributed terms: identical (kernel, component) pairs recur
  // across tensor entries, especially with uniform kernel families
  struct Entry {
    const KernelSpec* k;
    int comp;
    double v;
  };
  std::vector<Entry> cache;
  cache.reserve(2 * (n1 + n2));
  auto dist = [&](const KernelSpec& ker, int comp, bool layer2) {
    for (const auto& e : cache)
      if (e.k == &ker && e.comp == comp) return e.v;
    const double cg = layer2 ? net_.g_of_y(comp - n1, x_n[comp])
                             : net_.g_bar_of_x(comp, x_n[comp]);
    const double v = conv(view, n, ker, comp, layer2, cg);
    cache.push_back({&ker, comp, v});
    return v;
  };

  for (int p = 0; p < n1; ++p) {
    double s = net_.I[p] - net_.a[p] * x_n[p];
    for (int q = 0; q < n2; ++q)
      for (int r = 0; r < n2; ++r) {
        const double dv = net_.d.at(q, p, r);
        if (dv == 0.0) continue;
        s += dv * dist(net_.k.at(q, p, r), n1 + q, true) *
             dist(net_.h.at(q, p, r), n1 + r, true);
      }
    f[p] = s;
  }
  for (int q = 0; q < n2; ++q) {
    double s = net_.J[q] - net_.a_bar[q] * x_n[n1 + q];
    for (int p = 0; p < n1; ++p)
      for (int r = 0; r < n1; ++r) {
        const double dv = net_.d_bar.at(p, q, r);
        if (dv == 0.0) continue;
        s += dv * dist(net_.k_bar.at(p, q, r), p, false) *
             dist(net_.h_bar.at(p, q, r), r, false);
      }
    f[n1 + q] = s;
  }
}

BamSystem::BamSystem(const BamNetwork& net, double window)
    : eval_(net, window) {}

double BamSystem::neutral_coeff(int i) const {
  return i < eval_.net().n1 ? eval_.net().c : eval_.net().c_bar;
}

double BamSystem::history(int i, double t) const {
  const auto& net = eval_.net();
  return i < net.n1 ? net.phi[i](t) : net.phi_bar[i - net.n1](t);
}

double BamSystem::history_extent(int i) const {
  const auto& net = eval_.net();
  return i < net.n1 ? net.phi[i].extent() : net.phi_bar[i - net.n1].extent();
}

void BamSystem::rhs(const StateView& view, long n, const double* x_n,
                    double* f_out) const {
  eval_.eval(view, n, x_n, f_out);
}

Trajectory simulate(const BamNetwork& net, const SolverConfig& cfg) {
  BamSystem sys(net, cfg.memory == SolverConfig::Memory::Windowed
                         ? cfg.window
                         : std::numeric_limits<double>::infinity());
  return integrate(sys, net.delta, net.mu, cfg);
}

double caputo_residual(const Trajectory& traj, const BamNetwork& net,
                       size_t idx) {
  if (idx < 1 || idx >= traj.rows())
    throw std::invalid_argument("caputo_residual: index out of range");
  BamSystem sys(net);
  const int m = traj.cols;
  StateView view{traj.states.data(), m, 0, &sys, traj.step};
  std::vector<double> f(m), xn(m);
  for (int i = 0; i < m; ++i) xn[i] = traj.state(idx, i);
  sys.rhs(view, (long)idx, xn.data(), f.data());

  const double delta = net.delta;
  const double scale = std::pow(traj.step, -delta) * rgamma(2.0 - delta);
  double worst = 0.0;
  for (int i = 0; i < m; ++i) {
    double d = 0.0;
    for (size_t j = 0; j < idx; ++j) {
      const double w =
          std::pow((double)(j + 1), 1.0 - delta) - std::pow((double)j, 1.0 - delta);
      d += w * (traj.z_state(idx - j, i) - traj.z_state(idx - j - 1, i));
    }
    worst = std::max(worst, std::abs(scale * d - f[i]));
  }
  return worst;
}

void write_trajectory_csv(const Trajectory& traj,
                          const std::vector<std::string>& names,
                          const std::string& path) {
  if ((int)names.size() != traj.cols)
    throw std::invalid_argument("write_trajectory_csv: name count mismatch");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_trajectory_csv: cannot open " + path);
  out << "t";
  for (const auto& n : names) out << "," << n;
  out << "\n";
  char buf[32];
  for (size_t i = 0; i < traj.rows(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", traj.times[i]);
    out << buf;
    for (int j = 0; j < traj.cols; ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", traj.state(i, j));
      out << "," << buf;
    }
    out << "\n";
  }
}

}  // namespace fbam
