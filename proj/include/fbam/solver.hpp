#pragma once

#include <limits>
#include <string>
#include <vector>

#include "fbam/model.hpp"

// Predictor-corrector (Adams-Bashforth-Moulton) integration of Caputo
// fractional systems with a neutral delay term.  The stepper advances the
// neutral combination z_i(t) = x_i(t) - c_i x_i(t - mu) and recovers the
// state exactly through x(t) = z(t) + c_i x(t - mu), which requires mu to be
// an integer multiple of the step.

namespace fbam {

class numeric_blowup_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SolverConfig {
  double step = 0.02;
  double t_end = 10.0;
  int corrector_iterations = 1;  // corrector sweeps per step (P-E-(C-E)^m)

  // Windowed truncates the distributed-delay convolutions to the most recent
  // `window` time units (error bounded by the kernel tail mass beyond the
  // window); the fractional-derivative memory itself is never truncated.
  enum class Memory { Full, Windowed } memory = Memory::Full;
  double window = 0.0;  // Windowed: length in time units

  void validate(double mu) const;  // throws std::invalid_argument
};

struct Trajectory {
  double step = 0.0;
  int cols = 0;
  std::vector<double> times;
  std::vector<double> states;    // row-major, times.size() x cols
  std::vector<double> z_states;  // neutral combination on the same layout

  size_t rows() const { return times.size(); }
  double state(size_t i, int j) const { return states[i * cols + j]; }
  double z_state(size_t i, int j) const { return z_states[i * cols + j]; }
};

class NeutralSystem;

// Read access to the grid states of one block of a (possibly larger) system,
// falling back to the history functions for negative grid indices.
struct StateView {
  const double* data = nullptr;  // row-major grid states
  int stride = 0;                // full row width
  int offset = 0;                // first column of this block
  const NeutralSystem* sys = nullptr;  // history supplier (full index space)
  double step = 0.0;

  double operator()(int i, long j) const;
};

// Right-hand sides f_i of D^delta[x_i - c_i x_i(t-mu)] = f_i(t, x(.)).
class NeutralSystem {
 public:
  virtual ~NeutralSystem() = default;
  virtual int dim() const = 0;
  virtual double neutral_coeff(int i) const = 0;
  virtual double history(int i, double t) const = 0;  // t <= 0
  // length of the non-constant part of history i (0 for pure constants)
  virtual double history_extent(int i) const { return 0.0; }
  // f at time n*step; past grid states via view, candidate state x_n.
  virtual void rhs(const StateView& view, long n, const double* x_n,
                   double* f_out) const = 0;
};

Trajectory integrate(const NeutralSystem& sys, double delta, double mu,
                     const SolverConfig& cfg);

// Network right-hand side evaluation shared by plain simulation, the
// synchronization driver and the residual check.
class BamEvaluator {
 public:
  explicit BamEvaluator(const BamNetwork& net,
                        double window = std::numeric_limits<double>::infinity());
  int dim() const { return net_.n1 + net_.n2; }
  const BamNetwork& net() const { return net_; }
  // Candidate states x_n are local to the block the view points at.
  void eval(const StateView& view, long n, const double* x_n, double* f) const;

 private:
  BamNetwork net_;
  double window_;
  double conv(const StateView& view, long n, const KernelSpec& ker, int comp,
              bool layer2, double candidate_g) const;
};

class BamSystem : public NeutralSystem {
 public:
  explicit BamSystem(const BamNetwork& net,
                     double window = std::numeric_limits<double>::infinity());
  int dim() const override { return eval_.dim(); }
  double neutral_coeff(int i) const override;
  double history(int i, double t) const override;
  double history_extent(int i) const override;
  void rhs(const StateView& view, long n, const double* x_n,
           double* f_out) const override;

 private:
  BamEvaluator eval_;
};

Trajectory simulate(const BamNetwork& net, const SolverConfig& cfg);

// Defect of the computed trajectory against an L1 discretization of the
// Caputo derivative of the neutral combination at grid index idx (>= 1):
// max over components of |D^delta_L1 z - f|.
double caputo_residual(const Trajectory& traj, const BamNetwork& net,
                       size_t idx);

// CSV export: header "t,<names...>", 17 significant digits, one row per step.
void write_trajectory_csv(const Trajectory& traj,
                          const std::vector<std::string>& names,
                          const std::string& path);

}  // namespace fbam
