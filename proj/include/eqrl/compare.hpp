#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "eqrl/trainer.hpp"

namespace eqrl {

struct CurvePoint {
  std::int64_t step = 0;
  double mean = 0.0;
  double two_sigma = 0.0;  // 2 x sample std across seeds
};

struct ModeSummary {
  AgentMode mode = AgentMode::baseline;
  int n_seeds = 0;
  std::vector<CurvePoint> curve;  // only steps every seed reported
  std::optional<std::int64_t> steps_to_threshold;
  double best_mean = 0.0;
  double final_mean = 0.0;
  double final_std = 0.0;  // sample std across seeds at the last step
};

struct ComparisonSummary {
  Algorithm algo = Algorithm::td3;
  double threshold_fraction = 0.8;
  double threshold = 0.0;  // fraction x best seed-mean return of either mode
  ModeSummary baseline;
  ModeSummary equivariant;
  bool improved = false;          // equivariant reaches the threshold strictly earlier
  std::optional<double> speedup;  // baseline steps / equivariant steps
  double pooled_final_std = 0.0;  // sqrt((s_b^2 + s_e^2) / 2)
};

/// Seed-mean curve and 2-sigma band over the steps all logs share. Throws
/// std::runtime_error for an empty set, mixed modes/algorithms or no
/// common steps.
ModeSummary aggregate_mode(const std::vector<TrainingLog>& logs);

/// Steps-to-threshold: first step whose seed-mean return reaches
/// threshold_fraction of the best seed-mean return of either mode.
ComparisonSummary compare_modes(const std::vector<TrainingLog>& baseline,
                                const std::vector<TrainingLog>& equivariant,
                                double threshold_fraction = 0.8);

void write_comparison_csv(std::ostream& os, const ComparisonSummary& s);
void print_comparison(std::ostream& os, const ComparisonSummary& s);

/// `<dir>/<algo>_<mode>_seed<seed>.csv`
std::string training_log_path(const std::string& dir, Algorithm algo, AgentMode mode,
                              std::uint64_t seed);
/// `<dir>/<algo>_<mode>_seed<seed>_<tag>.policy`
std::string policy_path(const std::string& dir, Algorithm algo, AgentMode mode,
                        std::uint64_t seed, const std::string& tag);

}  // namespace eqrl
