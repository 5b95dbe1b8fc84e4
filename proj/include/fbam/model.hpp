#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "fbam/kernels.hpp"

// Problem description for a two-layer bidirectional network with
// higher-order (pairwise product) couplings, a neutral delay term and
// distributed delays, driven by a Caputo derivative of order delta in (0,1).
//
// Layer sizes are n1 (states x_p) and n2 (states y_q).  The layer-1 dynamics
// read, for p = 1..n1,
//   D^delta[x_p(t) - c x_p(t - mu)] =
//     -a_p x_p(t)
//     + sum_{q,s} d[q][p][s] (\int k_qps(w) g(y_q(t-w)) dw)
//                            (\int h_qps(w) g(y_s(t-w)) dw)
//     + I_p,
// and symmetrically for layer 2 with bars (tensor d_bar indexed [p][q][r],
// activation g_bar applied to layer-1 states, inputs J_q, neutral factor
// c_bar).  Distributed integrals run over [0, inf) against the pre-history
// by default; a finite-window variant truncates them at the current time.

namespace fbam {

// Scalar activation applied componentwise within a layer, with the Lipschitz
// constant (and global bound, when one exists) that the certificates consume.
struct Activation {
  enum class Kind { Tanh, Asinh, Custom };

  Kind kind = Kind::Tanh;
  double lipschitz = 1.0;
  std::optional<double> bound;  // sup |g|; empty for unbounded activations
  std::function<double(double)> fn;  // Custom only

  double operator()(double x) const {
    switch (kind) {
      case Kind::Tanh: return std::tanh(x);
      case Kind::Asinh: return std::asinh(x);
      case Kind::Custom: return fn(x);
    }
    return 0.0;
  }

  static Activation make_tanh() { return {Kind::Tanh, 1.0, 1.0, nullptr}; }
  static Activation make_asinh() { return {Kind::Asinh, 1.0, std::nullopt, nullptr}; }
};

// Initial data on (-inf, 0] for one state component: either a constant, or
// samples on [-T, 0] (linear interpolation) preceded by a constant.
class History {
 public:
  static History constant(double v);
  static History sampled(std::vector<double> times, std::vector<double> values,
                         double pre_value);

  double operator()(double t) const;  // t <= 0
  double pre_value() const { return pre_value_; }
  double sup_abs() const;  // sup over (-inf, 0] of |value|
  double extent() const;   // length of the sampled part; 0 for constants
  History shifted(double offset) const;  // pointwise value + offset

 private:
  std::vector<double> times_;   // increasing, last == 0; empty for constant
  std::vector<double> values_;
  double pre_value_ = 0.0;
};

// Dense rank-3 coefficient tensor with explicit dimensions.
class Tensor3 {
 public:
  Tensor3() = default;
  Tensor3(int d0, int d1, int d2, double fill = 0.0)
      : d0_(d0), d1_(d1), d2_(d2), v_((size_t)d0 * d1 * d2, fill) {}

  double& at(int i, int j, int k) { return v_[((size_t)i * d1_ + j) * d2_ + k]; }
  double at(int i, int j, int k) const { return v_[((size_t)i * d1_ + j) * d2_ + k]; }
  int dim0() const { return d0_; }
  int dim1() const { return d1_; }
  int dim2() const { return d2_; }

 private:
  int d0_ = 0, d1_ = 0, d2_ = 0;
  std::vector<double> v_;
};

// Family of kernels indexed by a coefficient-tensor triple.  Most problems
// use one kernel for every triple; the uniform case stores a single spec.
class KernelFamily {
 public:
  KernelFamily() = default;
  static KernelFamily uniform(KernelSpec k);
  static KernelFamily per_triple(int d0, int d1, int d2,
                                 std::vector<KernelSpec> specs);

  const KernelSpec& at(int i, int j, int k) const;
  bool is_uniform() const { return uniform_; }
  void validate() const;

 private:
  bool uniform_ = true;
  int d0_ = 0, d1_ = 0, d2_ = 0;
  std::vector<KernelSpec> specs_{KernelSpec::exponential(1.0, 1.0)};
};

enum class DelayConvention {
  InfiniteMemory,  // distributed integrals over [0, inf), history included
  FiniteWindow,    // integrals truncated to [0, t]; history contributes zero
};

struct BamNetwork {
  int n1 = 0, n2 = 0;

  std::vector<double> a, a_bar;  // self-decay rates, sizes n1 / n2, positive
  double c = 0.0, c_bar = 0.0;   // neutral coefficients, in [0, 1)
  double mu = 1.0;               // neutral delay, positive
  double delta = 0.9;            // Caputo order, in (0, 1)

  Tensor3 d;      // [q][p][s]: n2 x n1 x n2
  Tensor3 d_bar;  // [p][q][r]: n1 x n2 x n1

  KernelFamily k, h;          // layer-1 couplings, indexed (q, p, s)
  KernelFamily k_bar, h_bar;  // layer-2 couplings, indexed (p, q, r)

  Activation g;      // applied to layer-2 states in the layer-1 equations
  Activation g_bar;  // applied to layer-1 states in the layer-2 equations

  std::vector<double> I, J;  // external inputs, sizes n1 / n2

  std::vector<History> phi, phi_bar;  // initial data, sizes n1 / n2

  DelayConvention convention = DelayConvention::InfiniteMemory;

  // Activation-argument offsets introduced by shift_to_origin; zero for a
  // network stated in its original coordinates.  g is evaluated at
  // (state + offset) so the shifted system keeps the same tensors.
  std::vector<double> y_offset, x_offset;  // sizes n2 / n1

  double g_of_y(int q, double y_val) const {
    return g(y_val + (y_offset.empty() ? 0.0 : y_offset[q]));
  }
  double g_bar_of_x(int p, double x_val) const {
    return g_bar(x_val + (x_offset.empty() ? 0.0 : x_offset[p]));
  }

  void validate() const;  // throws std::invalid_argument with the field name
};

struct Equilibrium {
  std::vector<double> x_star, y_star;
  double residual = 0.0;  // max componentwise defect of the fixed-point map
  int iterations = 0;
};

class non_contraction_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Damped fixed-point iteration (relaxation factor 1/2) on the equilibrium
// system.  Throws non_contraction_error when the residual stops contracting
// before reaching tol.
Equilibrium find_equilibrium(const BamNetwork& net, double tol = 1e-12,
                             int max_iterations = 10000);

// Coordinates u = x - x*, v = y - y*: same tensors and kernels, activation
// offsets set to the equilibrium, inputs replaced so the origin is a fixed
// point, histories shifted by the equilibrium.
BamNetwork shift_to_origin(const BamNetwork& net, const Equilibrium& eq);

}  // namespace fbam
