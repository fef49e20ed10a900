#pragma once

#include <functional>
#include <optional>
#include <ostream>
#include <vector>

#include <json.hpp>

#include "yamabe/model.hpp"
#include "yamabe/numerics.hpp"

namespace yamabe {

/**
 * Boundary behaviour at one end of the truncated interval, imposed through a
 * ghost point and a centered first difference.
 *
 * decay:   u ~ e^{-|x|}, i.e. u_x = u on the left and u_x = -u on the right.
 * plateau: 1 - u ~ e^{-gamma|x|}, i.e. u_x = -gamma(1-u) on the left and
 *          u_x = gamma(1-u) on the right.
 */
enum class BoundaryKind { decay, plateau };

struct BoundarySide {
  BoundaryKind kind = BoundaryKind::decay;
  double gamma = 0.0;  ///< plateau only
};

struct BoundaryConditions {
  BoundarySide left;
  BoundarySide right;
};

struct FlowState {
  double tau = 0.0;
  UniformGrid grid;
  std::vector<double> u;
};

struct SolverConfig {
  double dtau = 1e-3;
  double p = 5.0;
  /// Tolerance on max |F_i / J_ii| (residual scaled by the Jacobian diagonal).
  double newton_tol = 1e-14;
  int newton_max_iter = 30;
  BoundaryConditions bc;
  double extinction_threshold = 1e-10;
  int max_halvings = 10;

  void validate() const;
};

struct StepReport {
  int newton_iters = 0;
  double final_residual = 0.0;
  double mass_p = 0.0;
  double mass_1 = 0.0;
  double max_u = 0.0;
};

/// Newton did not converge; the caller may retry with a smaller step.
class StepFailure : public NumericalFailure {
public:
  StepFailure(const std::string& what, double residual)
      : NumericalFailure("pde/step", what), residual_(residual) {}
  double residual() const { return residual_; }

private:
  double residual_;
};

/// One backward-Euler step of length cfg.dtau.
std::pair<FlowState, StepReport> step_implicit(const FlowState& state, const SolverConfig& cfg);

/**
 * Boundary rows of -D^2 with the ghost point eliminated: row i reads
 * diag * u_i + off * u_neighbor + rhs.
 */
struct BoundaryRow {
  double diag;
  double off;
  double rhs;
};
BoundaryRow apply_boundary(const BoundarySide& side, bool left, double dx);

/// Discrete second derivative including the ghost-point boundary closure.
std::vector<double> second_difference(const std::vector<double>& u, double dx, const BoundaryConditions& bc);

struct Mass {
  double mass_p = 0.0;
  double mass_1 = 0.0;
};
Mass mass_integrals(const FlowState& state, double p);

struct StepRecord {
  double tau;
  double dtau;
  StepReport report;
};

struct Trajectory {
  std::vector<FlowState> snapshots;
  std::vector<StepRecord> steps;
  bool extinct = false;
  std::optional<double> extinction_tau;
  int halvings = 0;
};

/// Called after every accepted step with the previous and new states.
using StepObserver = std::function<void(const FlowState& before, const FlowState& after, const StepReport&)>;

/**
 * Steps from state.tau to tau_end. Step k ends at tau_0 + k dtau (the last
 * step is shortened to land on tau_end); a failing step is retried as two
 * half steps, recursively up to cfg.max_halvings. Snapshots are kept every
 * `snapshot_every` steps and at the final step.
 */
Trajectory evolve(const FlowState& state, double tau_end, const SolverConfig& cfg, int snapshot_every,
                  const StepObserver& observer = {});

void write_trajectory_csv(std::ostream& os, const Trajectory& traj);
nlohmann::json trajectory_manifest(const Trajectory& traj, const SolverConfig& cfg);

}  // namespace yamabe
