#include "fbam/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace fbam {

// ---------------------------------------------------------------------------
// History

History History::constant(double v) {
  History h;
  h.pre_value_ = v;
  return h;
}

History History::sampled(std::vector<double> times, std::vector<double> values,
                         double pre_value) {
  if (times.size() < 2 || times.size() != values.size())
    throw std::invalid_argument("History: need matching times/values, length >= 2");
  for (size_t i = 1; i < times.size(); ++i)
    if (!(times[i] > times[i - 1]))
      throw std::invalid_argument("History: times must be strictly increasing");
  if (times.back() != 0.0)
    throw std::invalid_argument("History: last sample time must be 0");
  History h;
  h.times_ = std::move(times);
  h.values_ = std::move(values);
  h.pre_value_ = pre_value;
  return h;
}

double History::operator()(double t) const {
  if (t > 0.0) throw std::invalid_argument("History: defined for t <= 0 only");
  if (times_.empty() || t <= times_.front()) return pre_value_;
  const auto it = std::upper_bound(times_.begin(), times_.end(), t);
  const size_t i = (size_t)(it - times_.begin());
  if (i >= times_.size()) return values_.back();
  const double w = (t - times_[i - 1]) / (times_[i] - times_[i - 1]);
  return values_[i - 1] * (1.0 - w) + values_[i] * w;
}

double History::sup_abs() const {
  double s = std::abs(pre_value_);
  for (double v : values_) s = std::max(s, std::abs(v));
  return s;
}

double History::extent() const { return times_.empty() ? 0.0 : -times_.front(); }

History History::shifted(double offset) const {
  History h = *this;
  h.pre_value_ += offset;
  for (double& v : h.values_) v += offset;
  return h;
}

// ---------------------------------------------------------------------------
// KernelFamily

KernelFamily KernelFamily::uniform(KernelSpec k) {
  k.validate();
  KernelFamily f;
  f.uniform_ = true;
  f.specs_ = {std::move(k)};
  return f;
}

KernelFamily KernelFamily::per_triple(int d0, int d1, int d2,
                                      std::vector<KernelSpec> specs) {
  if ((size_t)d0 * d1 * d2 != specs.size())
    throw std::invalid_argument("KernelFamily: spec count does not match dimensions");
  KernelFamily f;
  f.uniform_ = false;
  f.d0_ = d0;
  f.d1_ = d1;
  f.d2_ = d2;
  f.specs_ = std::move(specs);
  f.validate();
  return f;
}

const KernelSpec& KernelFamily::at(int i, int j, int k) const {
  if (uniform_) return specs_[0];
  return specs_[((size_t)i * d1_ + j) * d2_ + k];
}

void KernelFamily::validate() const {
  for (const auto& s : specs_) s.validate();
}

// ---------------------------------------------------------------------------
// BamNetwork

void BamNetwork::validate() const {
  auto fail = [](const std::string& what) {
    throw std::invalid_argument("BamNetwork: " + what);
  };
  if (n1 <= 0 || n2 <= 0) fail("layer sizes must be positive");
  if ((int)a.size() != n1 || (int)a_bar.size() != n2)
    fail("decay-rate vectors must match the layer sizes");
  for (double v : a)
    if (!(v > 0.0)) fail("a must be positive");
  for (double v : a_bar)
    if (!(v > 0.0)) fail("a_bar must be positive");
  if (!(c >= 0.0) || c >= 1.0 || !(c_bar >= 0.0) || c_bar >= 1.0)
    fail("neutral coefficients must lie in [0, 1)");
  if (!(mu > 0.0)) fail("mu must be positive");
  if (!(delta > 0.0) || delta > 1.0) fail("delta must lie in (0, 1]");
  if (d.dim0() != n2 || d.dim1() != n1 || d.dim2() != n2)
    fail("tensor d must have shape n2 x n1 x n2");
  if (d_bar.dim0() != n1 || d_bar.dim1() != n2 || d_bar.dim2() != n1)
    fail("tensor d_bar must have shape n1 x n2 x n1");
  if ((int)I.size() != n1 || (int)J.size() != n2)
    fail("input vectors must match the layer sizes");
  if ((int)phi.size() != n1 || (int)phi_bar.size() != n2)
    fail("history vectors must match the layer sizes");
  if (!y_offset.empty() && (int)y_offset.size() != n2)
    fail("y_offset must be empty or of size n2");
  if (!x_offset.empty() && (int)x_offset.size() != n1)
    fail("x_offset must be empty or of size n1");
  if (!(g.lipschitz > 0.0) || !(g_bar.lipschitz > 0.0))
    fail("activation Lipschitz constants must be positive");
  if (g.kind == Activation::Kind::Custom && !g.fn)
    fail("custom activation g has no function");
  if (g_bar.kind == Activation::Kind::Custom && !g_bar.fn)
    fail("custom activation g_bar has no function");
  k.validate();
  h.validate();
  k_bar.validate();
  h_bar.validate();
}

namespace {

// One sweep of the equilibrium fixed-point map.  Writes the images of
// (x, y) under the map into (nx, ny).
void equilibrium_map(const BamNetwork& net, const std::vector<double>& x,
                     const std::vector<double>& y, std::vector<double>& nx,
                     std::vector<double>& ny) {
  for (int p = 0; p < net.n1; ++p) {
    double s = net.I[p];
    for (int q = 0; q < net.n2; ++q)
      for (int r = 0; r < net.n2; ++r)
        s += net.d.at(q, p, r) * total_mass(net.k.at(q, p, r)) *
             total_mass(net.h.at(q, p, r)) * net.g_of_y(q, y[q]) *
             net.g_of_y(r, y[r]);
    nx[p] = s / net.a[p];
  }
  for (int q = 0; q < net.n2; ++q) {
    double s = net.J[q];
    for (int p = 0; p < net.n1; ++p)
      for (int r = 0; r < net.n1; ++r)
        s += net.d_bar.at(p, q, r) * total_mass(net.k_bar.at(p, q, r)) *
             total_mass(net.h_bar.at(p, q, r)) * net.g_bar_of_x(p, x[p]) *
             net.g_bar_of_x(r, x[r]);
    ny[q] = s / net.a_bar[q];
  }
}

}  // namespace

Equilibrium find_equilibrium(const BamNetwork& net, double tol,
                             int max_iterations) {
  net.validate();
  std::vector<double> x(net.n1, 0.0), y(net.n2, 0.0);
  std::vector<double> nx(net.n1), ny(net.n2);

  double best_window = std::numeric_limits<double>::infinity();
  double window_start = best_window;
  Equilibrium eq;
  for (int it = 1; it <= max_iterations; ++it) {
    equilibrium_map(net, x, y, nx, ny);
    double res = 0.0;
    for (int p = 0; p < net.n1; ++p) res = std::max(res, std::abs(nx[p] - x[p]));
    for (int q = 0; q < net.n2; ++q) res = std::max(res, std::abs(ny[q] - y[q]));
    // damped update: move halfway toward the image
    for (int p = 0; p < net.n1; ++p) x[p] = 0.5 * (x[p] + nx[p]);
    for (int q = 0; q < net.n2; ++q) y[q] = 0.5 * (y[q] + ny[q]);
    if (res <= tol) {
      eq.x_star = x;
      eq.y_star = y;
      eq.residual = res;
      eq.iterations = it;
      return eq;
    }
    best_window = std::min(best_window, res);
    if (it % 25 == 0) {
      // progress check over a 25-iteration window
      if (!(best_window < 0.9 * window_start))
        throw non_contraction_error(
            "find_equilibrium: fixed-point residual stopped contracting");
      window_start = best_window;
    }
  }
  throw non_contraction_error("find_equilibrium: iteration limit reached");
}

BamNetwork shift_to_origin(const BamNetwork& net, const Equilibrium& eq) {
  net.validate();
  if ((int)eq.x_star.size() != net.n1 || (int)eq.y_star.size() != net.n2)
    throw std::invalid_argument("shift_to_origin: equilibrium size mismatch");

  BamNetwork out = net;
  // activation offsets compose with any existing ones
  out.x_offset.assign(net.n1, 0.0);
  out.y_offset.assign(net.n2, 0.0);
  for (int p = 0; p < net.n1; ++p)
    out.x_offset[p] = (net.x_offset.empty() ? 0.0 : net.x_offset[p]) + eq.x_star[p];
  for (int q = 0; q < net.n2; ++q)
    out.y_offset[q] = (net.y_offset.empty() ? 0.0 : net.y_offset[q]) + eq.y_star[q];

  // Constant terms: with u = x - x*, the equilibrium relation replaces I_p by
  // I_p - a_p x*_p (and symmetrically), so the origin becomes a fixed point.
  for (int p = 0; p < net.n1; ++p) out.I[p] = net.I[p] - net.a[p] * eq.x_star[p];
  for (int q = 0; q < net.n2; ++q)
    out.J[q] = net.J[q] - net.a_bar[q] * eq.y_star[q];

  // Histories move with the coordinates.  Sampled histories keep their grid.
  for (int p = 0; p < net.n1; ++p) out.phi[p] = net.phi[p].shifted(-eq.x_star[p]);
  for (int q = 0; q < net.n2; ++q)
    out.phi_bar[q] = net.phi_bar[q].shifted(-eq.y_star[q]);
  return out;
}

}  // namespace fbam
