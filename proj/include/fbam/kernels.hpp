#pragma once

#include <stdexcept>
#include <vector>

// Delay kernels for the distributed-delay terms, the aggregate decay
// envelope built from a network's coupling data, and the numerical check of
// the kernel smallness condition that feeds the stability certificates.

namespace fbam {

struct BamNetwork;

class divergence_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A single non-negative delay kernel on [0, inf).  Either a scaled
// exponential weight * exp(-rate * t), or a sampled table on a grid starting
// at 0 (linear interpolation), optionally continued past the last sample by a
// declared exponential tail.
struct KernelSpec {
  enum class Form { Exponential, Table };

  Form form = Form::Exponential;
  double weight = 1.0;  // Exponential
  double rate = 1.0;
  std::vector<double> grid;    // Table: strictly increasing, grid[0] == 0
  std::vector<double> values;  // Table: kernel samples, non-negative
  bool has_tail = false;       // Table: values.back()*exp(-tail_rate*(t-T))
  double tail_rate = 0.0;

  static KernelSpec exponential(double weight, double rate);
  static KernelSpec table(std::vector<double> grid, std::vector<double> values);
  static KernelSpec table_with_tail(std::vector<double> grid,
                                    std::vector<double> values,
                                    double tail_rate);

  double eval(double t) const;  // t >= 0
  void validate() const;        // throws std::invalid_argument
};

// \int_0^inf k(s) ds.  Exact for exponentials; trapezoid plus declared tail
// for tables.  Throws divergence_error when a table kernel ends at a
// non-negligible value without a declared tail (the mass cannot be certified
// finite from the data given).
double total_mass(const KernelSpec& k);

// \int_t^inf k(s) ds, same conventions as total_mass.
double tail_mass(const KernelSpec& k, double t);

// Upper envelope of a weighted family of kernels:
//   value(t) = max over groups of sum_i coef_i * k_i(t).
// Carries a cached cumulative table so tail integrals of the envelope are
// cheap to query.
class KernelEnvelope {
 public:
  struct Group {
    std::vector<double> coef;
    std::vector<KernelSpec> kernels;
  };

  KernelEnvelope() = default;
  explicit KernelEnvelope(std::vector<Group> groups);

  bool empty() const { return groups_.empty(); }
  double operator()(double t) const;
  double tail(double t) const;  // \int_t^inf of the envelope
  double mass() const { return tail(0.0); }

 private:
  std::vector<Group> groups_;
  // cumulative trapezoid of the envelope on [0, cutoff_]
  double cutoff_ = 0.0;
  double step_ = 0.0;
  std::vector<double> cum_;      // cum_[j] = \int_{j*step}^{cutoff}
  double beyond_cutoff_ = 0.0;   // bound on \int_{cutoff}^inf
  void build_table();
};

enum class ActivationMode { Bounded, Unbounded };

// Aggregate decay data extracted from a network.
//  - Bounded mode: K holds the envelope K(t) combining activation bounds,
//    Lipschitz constants, coupling weights and kernel masses; h_star is empty.
//  - Unbounded mode: K holds the raw kernel envelope K*(t) (pointwise max of
//    every delay kernel in the network) and h_star the envelope of the
//    second-slot kernels, whose mass enters the eta gate.
struct AggregateKernel {
  ActivationMode mode = ActivationMode::Bounded;
  KernelEnvelope K;
  KernelEnvelope h_star;
  double operator()(double t) const { return K(t); }
};

AggregateKernel aggregate_kernel(const BamNetwork& net, ActivationMode mode);

// Measurement of the kernel smallness condition: with
//   inner(w) = \int_0^w E_delta(-xi l^delta) K(w-l) dl + \int_w^inf K(s) ds,
//   lhs(t)   = \int_0^t (t-w)^{delta-1} E_{delta,delta}(-xi (t-w)^delta)
//              inner(w) dw,
// the report gives ratio(t) = lhs(t)/E_delta(-xi t^delta) at the requested
// grid times and omega_star = max over the grid.  The pre-history part of the
// inner integral is bounded by the kernel tail mass (the Mittag-Leffler
// factor is <= 1 there), which only ever increases the measured value.
struct KernelConditionReport {
  double omega_star = 0.0;
  std::vector<double> times;
  std::vector<double> ratios;
  int refinements = 0;    // doublings of the internal grid
  int internal_steps = 0; // final internal resolution
};

KernelConditionReport check_condition_k1(const KernelEnvelope& K, double xi,
                                         double delta,
                                         const std::vector<double>& grid);

}  // namespace fbam
