#include "fbam/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fbam/mittag_leffler.hpp"
#include "fbam/model.hpp"
#include "fbam/special.hpp"

namespace fbam {

namespace {
constexpr double kNegligible = 1e-14;  // relative: "ends at zero" threshold
}

KernelSpec KernelSpec::exponential(double weight, double rate) {
  KernelSpec k;
  k.form = Form::Exponential;
  k.weight = weight;
  k.rate = rate;
  k.validate();
  return k;
}

KernelSpec KernelSpec::table(std::vector<double> grid,
                             std::vector<double> values) {
  KernelSpec k;
  k.form = Form::Table;
  k.grid = std::move(grid);
  k.values = std::move(values);
  k.validate();
  return k;
}

KernelSpec KernelSpec::table_with_tail(std::vector<double> grid,
                                       std::vector<double> values,
                                       double tail_rate) {
  KernelSpec k;
  k.form = Form::Table;
  k.grid = std::move(grid);
  k.values = std::move(values);
  k.has_tail = true;
  k.tail_rate = tail_rate;
  k.validate();
  return k;
}

void KernelSpec::validate() const {
  if (form == Form::Exponential) {
    if (!(weight >= 0.0) || !std::isfinite(weight))
      throw std::invalid_argument("KernelSpec: weight must be non-negative");
    if (!(rate > 0.0))
      throw std::invalid_argument("KernelSpec: rate must be positive");
    return;
  }
  if (grid.size() < 2 || grid.size() != values.size())
    throw std::invalid_argument("KernelSpec: table needs matching grid/values, length >= 2");
  if (grid.front() != 0.0)
    throw std::invalid_argument("KernelSpec: table grid must start at 0");
  for (size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1]))
      throw std::invalid_argument("KernelSpec: table grid must be strictly increasing");
  for (double v : values)
    if (!(v >= 0.0) || !std::isfinite(v))
      throw std::invalid_argument("KernelSpec: table values must be non-negative");
  if (has_tail && !(tail_rate > 0.0))
    throw std::invalid_argument("KernelSpec: tail rate must be positive");
}

double KernelSpec::eval(double t) const {
  if (t < 0.0) throw std::invalid_argument("KernelSpec::eval: t must be >= 0");
  if (form == Form::Exponential) return weight * std::exp(-rate * t);
  if (t >= grid.back()) {
    if (!has_tail) return 0.0;
    return values.back() * std::exp(-tail_rate * (t - grid.back()));
  }
  const auto it = std::upper_bound(grid.begin(), grid.end(), t);
  const size_t i = (size_t)(it - grid.begin());  // grid[i-1] <= t < grid[i]
  const double w = (t - grid[i - 1]) / (grid[i] - grid[i - 1]);
  return values[i - 1] * (1.0 - w) + values[i] * w;
}

double tail_mass(const KernelSpec& k, double t) {
  if (t < 0.0) throw std::invalid_argument("tail_mass: t must be >= 0");
  if (k.form == KernelSpec::Form::Exponential)
    return k.weight / k.rate * std::exp(-k.rate * t);

  const double vmax = *std::max_element(k.values.begin(), k.values.end());
  if (!k.has_tail && k.values.back() > kNegligible * std::max(vmax, 1.0))
    throw divergence_error(
        "tail_mass: table kernel ends at a non-negligible value and declares "
        "no tail; its mass cannot be certified finite");

  double tail = k.has_tail ? k.values.back() / k.tail_rate : 0.0;
  if (t >= k.grid.back())
    return k.has_tail
               ? k.values.back() / k.tail_rate *
                     std::exp(-k.tail_rate * (t - k.grid.back()))
               : 0.0;
  // trapezoid over [t, end of grid]
  double sum = tail;
  double prev_t = k.grid.back(), prev_v = k.values.back();
  for (size_t i = k.grid.size() - 1; i-- > 0;) {
    double gt = k.grid[i], gv = k.values[i];
    if (gt < t) {
      gv = k.eval(t);
      gt = t;
    }
    sum += 0.5 * (prev_v + gv) * (prev_t - gt);
    prev_t = gt;
    prev_v = gv;
    if (gt == t) break;
  }
  return sum;
}

double total_mass(const KernelSpec& k) { return tail_mass(k, 0.0); }

// ---------------------------------------------------------------------------
// KernelEnvelope

KernelEnvelope::KernelEnvelope(std::vector<Group> groups)
    : groups_(std::move(groups)) {
  for (auto& g : groups_) {
    if (g.coef.size() != g.kernels.size())
      throw std::invalid_argument("KernelEnvelope: coef/kernel size mismatch");
    for (size_t i = 0; i < g.kernels.size(); ++i) {
      g.kernels[i].validate();
      if (!(g.coef[i] >= 0.0))
        throw std::invalid_argument("KernelEnvelope: coefficients must be >= 0");
    }
  }
  if (!groups_.empty()) build_table();
}

double KernelEnvelope::operator()(double t) const {
  double best = 0.0;
  for (const auto& g : groups_) {
    double s = 0.0;
    for (size_t i = 0; i < g.kernels.size(); ++i)
      s += g.coef[i] * g.kernels[i].eval(t);
    best = std::max(best, s);
  }
  return best;
}

void KernelEnvelope::build_table() {
  // Cut off where the summed tail bound drops below ~1e-16 of the mass scale.
  double scale = 0.0, cutoff = 1.0;
  for (const auto& g : groups_) {
    for (size_t i = 0; i < g.kernels.size(); ++i) {
      const double m = g.coef[i] * total_mass(g.kernels[i]);
      scale += m;
      const auto& k = g.kernels[i];
      if (k.form == KernelSpec::Form::Exponential) {
        if (m > 0.0)
          cutoff = std::max(cutoff, std::log(std::max(m, 1.0) * 1e18) / k.rate);
      } else {
        double end = k.grid.back();
        if (k.has_tail) end += std::log(1e18) / k.tail_rate;
        cutoff = std::max(cutoff, end);
      }
    }
  }
  cutoff_ = cutoff;
  const int n = 200000;
  step_ = cutoff_ / n;
  cum_.assign(n + 1, 0.0);
  double beyond = 0.0;
  for (const auto& g : groups_)
    for (size_t i = 0; i < g.kernels.size(); ++i)
      beyond += g.coef[i] * tail_mass(g.kernels[i], cutoff_);
  beyond_cutoff_ = beyond;
  cum_[n] = beyond;
  double prev = (*this)(cutoff_);
  for (int j = n; j-- > 0;) {
    const double v = (*this)(j * step_);
    cum_[j] = cum_[j + 1] + 0.5 * (v + prev) * step_;
    prev = v;
  }
}

double KernelEnvelope::tail(double t) const {
  if (t < 0.0) throw std::invalid_argument("KernelEnvelope::tail: t must be >= 0");
  if (groups_.empty()) return 0.0;
  if (t >= cutoff_) {
    double s = 0.0;
    for (const auto& g : groups_)
      for (size_t i = 0; i < g.kernels.size(); ++i)
        s += g.coef[i] * tail_mass(g.kernels[i], t);
    return s;
  }
  const double u = t / step_;
  const size_t j = std::min((size_t)u, cum_.size() - 2);
  const double w = u - j;
  return cum_[j] * (1.0 - w) + cum_[j + 1] * w;
}

// ---------------------------------------------------------------------------
// Aggregate envelope from a network

AggregateKernel aggregate_kernel(const BamNetwork& net, ActivationMode mode) {
  net.validate();
  AggregateKernel agg;
  agg.mode = mode;

  if (mode == ActivationMode::Bounded) {
    if (!net.g.bound || !net.g_bar.bound)
      throw std::invalid_argument(
          "aggregate_kernel: bounded mode needs activation bounds on both layers");
    const double GL = *net.g.bound * net.g.lipschitz;
    const double GM = *net.g_bar.bound * net.g_bar.lipschitz;

    KernelEnvelope::Group layer1, layer2;
    for (int q = 0; q < net.n2; ++q)
      for (int p = 0; p < net.n1; ++p)
        for (int s = 0; s < net.n2; ++s) {
          const double w = GL * std::abs(net.d.at(q, p, s));
          if (w == 0.0) continue;
          layer1.coef.push_back(w * total_mass(net.h.at(q, p, s)));
          layer1.kernels.push_back(net.k.at(q, p, s));
          layer1.coef.push_back(w * total_mass(net.k.at(q, p, s)));
          layer1.kernels.push_back(net.h.at(q, p, s));
        }
    for (int p = 0; p < net.n1; ++p)
      for (int q = 0; q < net.n2; ++q)
        for (int r = 0; r < net.n1; ++r) {
          const double w = GM * std::abs(net.d_bar.at(p, q, r));
          if (w == 0.0) continue;
          layer2.coef.push_back(w * total_mass(net.h_bar.at(p, q, r)));
          layer2.kernels.push_back(net.k_bar.at(p, q, r));
          layer2.coef.push_back(w * total_mass(net.k_bar.at(p, q, r)));
          layer2.kernels.push_back(net.h_bar.at(p, q, r));
        }
    agg.K = KernelEnvelope({std::move(layer1), std::move(layer2)});
    return agg;
  }

  // Unbounded mode: pointwise max of every individual kernel, and separately
  // of the second-slot (h-type) kernels.
  std::vector<KernelEnvelope::Group> all, hs;
  auto push = [](std::vector<KernelEnvelope::Group>& dst, const KernelSpec& k) {
    dst.push_back({{1.0}, {k}});
  };
  for (int q = 0; q < net.n2; ++q)
    for (int p = 0; p < net.n1; ++p)
      for (int s = 0; s < net.n2; ++s) {
        push(all, net.k.at(q, p, s));
        push(all, net.h.at(q, p, s));
        push(hs, net.h.at(q, p, s));
      }
  for (int p = 0; p < net.n1; ++p)
    for (int q = 0; q < net.n2; ++q)
      for (int r = 0; r < net.n1; ++r) {
        push(all, net.k_bar.at(p, q, r));
        push(all, net.h_bar.at(p, q, r));
        push(hs, net.h_bar.at(p, q, r));
      }
  agg.K = KernelEnvelope(std::move(all));
  agg.h_star = KernelEnvelope(std::move(hs));
  return agg;
}

// ---------------------------------------------------------------------------
// Kernel smallness condition

namespace {

// Fast evaluator for E_delta(-x), x >= 0.  ml_one is accurate but costs a
// quadrature in the mid range, and the refinement ladder below samples it at
// tens of thousands of points.  E_delta is entire, so a Chebyshev interpolant
// on [0, 50] built from a few exact values reproduces it to ~1e-12; beyond 50
// ml_one switches to its cheap asymptotic branch and is called directly.
class MlDecayTable {
 public:
  MlDecayTable(double delta, double xmax)
      : delta_(delta), xmax_(std::min(xmax, 50.0)) {
    const int n = 128;  // Chebyshev-Lobatto points
    nodes_.resize(n + 1);
    values_.resize(n + 1);
    weights_.resize(n + 1);
    for (int k = 0; k <= n; ++k) {
      const double ck = std::cos(M_PI * k / n);
      nodes_[k] = 0.5 * xmax_ * (1.0 - ck);
      values_[k] = ml_one(delta, -nodes_[k]);
      weights_[k] = (k % 2 == 0) ? 1.0 : -1.0;
      if (k == 0 || k == n) weights_[k] *= 0.5;
    }
  }

  double operator()(double x) const {
    if (x > xmax_) return ml_one(delta_, -x);
    double num = 0.0, den = 0.0;
    for (size_t k = 0; k < nodes_.size(); ++k) {
      const double d = x - nodes_[k];
      if (d == 0.0) return values_[k];
      const double w = weights_[k] / d;
      num += w * values_[k];
      den += w;
    }
    return num / den;
  }

 private:
  double delta_, xmax_;
  std::vector<double> nodes_, values_, weights_;
};

// One evaluation pass at internal resolution m; returns ratios at the snapped
// grid indices.
std::vector<double> k1_pass(const KernelEnvelope& K, double xi, double delta,
                            const MlDecayTable& ml_decay,
                            const std::vector<double>& grid, int m) {
  const double tmax = grid.back();
  const double h = tmax / m;

  std::vector<double> E(m + 1), Kv(m + 1), inner(m + 1), Phi(m + 1);
  for (int j = 0; j <= m; ++j) {
    const double t = j * h;
    E[j] = (j == 0) ? 1.0 : ml_decay(xi * std::pow(t, delta));
    Kv[j] = K(t);
    Phi[j] = (1.0 - E[j]) / xi;  // \int_0^t s^{delta-1} E_{d,d}(-xi s^delta) ds
  }
  // inner(j*h) by trapezoid convolution plus the history tail bound
  for (int j = 0; j <= m; ++j) {
    double s = 0.0;
    if (j > 0) {
      s = 0.5 * (E[0] * Kv[j] + E[j] * Kv[0]);
      for (int i = 1; i < j; ++i) s += E[i] * Kv[j - i];
      s *= h;
    }
    inner[j] = s + K.tail(j * h);
  }

  std::vector<double> ratios(grid.size());
  for (size_t gi = 0; gi < grid.size(); ++gi) {
    const int n = std::max(1, (int)std::llround(grid[gi] / h));
    // product-midpoint rule: the outer weakly singular factor integrates
    // exactly to differences of Phi; inner is sampled at interval midpoints.
    double lhs = 0.0;
    for (int j = 0; j < n; ++j)
      lhs += (Phi[n - j] - Phi[n - j - 1]) * 0.5 * (inner[j] + inner[j + 1]);
    ratios[gi] = lhs / E[n];
  }
  return ratios;
}

}  // namespace

KernelConditionReport check_condition_k1(const KernelEnvelope& K, double xi,
                                         double delta,
                                         const std::vector<double>& grid) {
  if (!(xi > 0.0))
    throw std::invalid_argument("check_condition_k1: xi must be positive");
  if (!(delta > 0.0) || !(delta < 1.0))
    throw std::invalid_argument("check_condition_k1: delta must lie in (0, 1)");
  if (grid.empty())
    throw std::invalid_argument("check_condition_k1: grid must be non-empty");
  for (size_t i = 0; i < grid.size(); ++i)
    if (!(grid[i] > 0.0) || (i > 0 && !(grid[i] > grid[i - 1])))
      throw std::invalid_argument(
          "check_condition_k1: grid must be positive and strictly increasing");

  KernelConditionReport rep;
  rep.times = grid;

  const MlDecayTable ml_decay(delta, xi * std::pow(grid.back(), delta));
  int m = 128;
  while (m < (int)grid.size() * 4) m *= 2;
  std::vector<double> ratios = k1_pass(K, xi, delta, ml_decay, grid, m);
  double omega = *std::max_element(ratios.begin(), ratios.end());
  int refinements = 0;
  while (true) {
    if (m >= 16384)
      throw accuracy_error("check_condition_k1: grid refinement did not converge");
    m *= 2;
    ++refinements;
    std::vector<double> next = k1_pass(K, xi, delta, ml_decay, grid, m);
    const double omega_next = *std::max_element(next.begin(), next.end());
    const bool done = std::abs(omega_next - omega) < 1e-4;
    ratios = std::move(next);
    omega = omega_next;
    if (done) break;
  }
  rep.ratios = std::move(ratios);
  rep.omega_star = omega;
  rep.refinements = refinements;
  rep.internal_steps = m;
  return rep;
}

}  // namespace fbam
