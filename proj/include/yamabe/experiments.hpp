#pragma once

#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "yamabe/config.hpp"
#include "yamabe/geometry.hpp"

namespace yamabe {

/// One acceptance line: measured value against a tolerance.
struct CriterionResult {
  int id = 0;
  std::string name;
  std::string property;   ///< what is being checked, in words
  double measured = 0.0;
  double tolerance = 0.0;
  std::string relation;   ///< "<=", ">=" or "in"
  bool pass = false;
  nlohmann::json details = nlohmann::json::object();
  double seconds = 0.0;
};

struct AcceptanceReport {
  std::vector<CriterionResult> results;

  bool all_pass() const;
  nlohmann::json to_json() const;
  void print_table(std::ostream& os) const;
};

/// Result of one u_m run inside a batch; failures are kept, not thrown.
struct BatchEntry {
  double m = 0.0;
  std::optional<AncientRun> run;
  std::string failure_stage;
  std::string failure;
  double seconds = 0.0;
};

/// Runs u_m for every m in cfg.m_list, at most cfg.workers at a time.
std::vector<BatchEntry> run_ancient_batch(const ExperimentConfig& cfg, const SupersolutionSpec& spec);

/// Sup of D_m = sup Q e^{-d tau} over each completed run, plus the contraction
/// test on consecutive increments used as the uniform-envelope check.
struct EnvelopeCheck {
  std::vector<double> m;
  std::vector<double> d_m;
  double D = 0.0;
  bool increments_contract = true;
};
EnvelopeCheck uniform_envelope(const std::vector<BatchEntry>& batch, double d);

/// [fit_lo, fit_hi] clipped to the run, skipping its first unit of tau; runs
/// too short to overlap the window fall back to everything after that unit.
std::pair<double, double> decay_fit_window(const ExperimentConfig& cfg, const AncientRun& run);

/// sup |u_a - u_b| over the common grid points at the snapshot nearest tau.
double nested_difference(const AncientRun& a, const AncientRun& b, double tau);

/// Max |D^2 w + w^p - w| of the sampled steady state on [-half, half].
double steady_residual(int n, double dx, double half);

struct TrackingResult {
  double error = 0.0;         ///< sup over the grid at the final time
  double mass_balance = 0.0;  ///< worst |dM_p/dtau - (M_p - M_1)| / (1 + M_p)
  double seconds = 0.0;
};
/// Evolves the lambda = 1.5 wave over span with plateau closure on the right.
TrackingResult track_wave(double dx, double dtau, double span = 2.0, double half_width = 40.0);

/// Worst centered mass-balance defect over the steps of a run.
double mass_balance_defect(const std::vector<StepRecord>& steps);

// Individual criteria.
CriterionResult criterion_root_algebra(const AcceptanceTolerances& tol);
CriterionResult criterion_barenblatt(const AcceptanceTolerances& tol);
CriterionResult criterion_steady_state(const AcceptanceTolerances& tol);
CriterionResult criterion_tail_rates(const AcceptanceTolerances& tol);
CriterionResult criterion_tracking(const AcceptanceTolerances& tol, TrackingResult* coarse_out = nullptr,
                                   TrackingResult* fine_out = nullptr);
CriterionResult criterion_intersection(const AcceptanceTolerances& tol);
CriterionResult criterion_distinguish(const AcceptanceTolerances& tol, const ModelParams& model);

/// Criteria 6 and 8-12 need the u_m runs; 6 also uses the tracking runs.
struct RunCriteriaInput {
  const ExperimentConfig* cfg = nullptr;
  const SupersolutionSpec* spec = nullptr;
  const std::vector<BatchEntry>* batch = nullptr;
  TrackingResult tracking_coarse;
  TrackingResult tracking_fine;
};
CriterionResult criterion_mass_identity(const RunCriteriaInput& in);
CriterionResult criterion_decay(const RunCriteriaInput& in);
CriterionResult criterion_barrier(const RunCriteriaInput& in);
CriterionResult criterion_max_bound(const RunCriteriaInput& in);
CriterionResult criterion_nested(const RunCriteriaInput& in);
CriterionResult criterion_geometry(const RunCriteriaInput& in);

/// Runs the whole suite; on_result is called as each line completes.
AcceptanceReport run_acceptance(const ExperimentConfig& cfg,
                                const std::function<void(const CriterionResult&)>& on_result = {});

}  // namespace yamabe
