#include "eqrl/compare.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <stdexcept>

#include "eqrl/csv.hpp"

namespace eqrl {

ModeSummary aggregate_mode(const std::vector<TrainingLog>& logs) {
  if (logs.empty()) throw std::runtime_error("aggregate_mode: no training logs");
  ModeSummary s;
  s.mode = logs.front().mode;
  s.n_seeds = static_cast<int>(logs.size());
  std::map<std::int64_t, std::vector<double>> by_step;
  for (const auto& log : logs) {
    if (log.mode != s.mode || log.algo != logs.front().algo) {
      throw std::runtime_error("aggregate_mode: logs mix modes or algorithms");
    }
    for (const auto& r : log.rows) by_step[r.env_step].push_back(r.mean_return);
  }
  for (const auto& [step, values] : by_step) {
    if (values.size() != logs.size()) continue;
    const double n = static_cast<double>(values.size());
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= n;
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    const double sd = values.size() > 1 ? std::sqrt(var / (n - 1.0)) : 0.0;
    s.curve.push_back(CurvePoint{step, mean, 2.0 * sd});
  }
  if (s.curve.empty()) {
    throw std::runtime_error("aggregate_mode: logs for mode '" + std::string(to_string(s.mode)) +
                             "' share no evaluation steps");
  }
  s.best_mean = s.curve.front().mean;
  for (const auto& p : s.curve) s.best_mean = std::max(s.best_mean, p.mean);
  s.final_mean = s.curve.back().mean;
  s.final_std = s.curve.back().two_sigma / 2.0;
  return s;
}

namespace {

std::optional<std::int64_t> first_crossing(const std::vector<CurvePoint>& curve, double threshold) {
  for (const auto& p : curve) {
    if (p.mean >= threshold) return p.step;
  }
  return std::nullopt;
}

}  // namespace

ComparisonSummary compare_modes(const std::vector<TrainingLog>& baseline,
                                const std::vector<TrainingLog>& equivariant,
                                double threshold_fraction) {
  ComparisonSummary s;
  s.baseline = aggregate_mode(baseline);
  s.equivariant = aggregate_mode(equivariant);
  if (s.baseline.mode != AgentMode::baseline || s.equivariant.mode != AgentMode::equivariant) {
    throw std::runtime_error("compare_modes: expected baseline and equivariant logs");
  }
  if (baseline.front().algo != equivariant.front().algo) {
    throw std::runtime_error("compare_modes: the two modes were trained with different algorithms");
  }
  s.algo = baseline.front().algo;
  s.threshold_fraction = threshold_fraction;
  s.threshold = threshold_fraction * std::max(s.baseline.best_mean, s.equivariant.best_mean);
  s.baseline.steps_to_threshold = first_crossing(s.baseline.curve, s.threshold);
  s.equivariant.steps_to_threshold = first_crossing(s.equivariant.curve, s.threshold);

  const auto& b = s.baseline.steps_to_threshold;
  const auto& e = s.equivariant.steps_to_threshold;
  s.improved = e.has_value() && (!b.has_value() || *e < *b);
  if (b && e && *e > 0) s.speedup = static_cast<double>(*b) / static_cast<double>(*e);
  s.pooled_final_std = std::sqrt(0.5 * (s.baseline.final_std * s.baseline.final_std +
                                        s.equivariant.final_std * s.equivariant.final_std));
  return s;
}

void write_comparison_csv(std::ostream& os, const ComparisonSummary& s) {
  os << kComparisonHeader << '\n';
  for (const ModeSummary* m : {&s.baseline, &s.equivariant}) {
    for (const auto& p : m->curve) {
      os << p.step << ',' << to_string(m->mode) << ',' << format_double(p.mean) << ','
         << format_double(p.two_sigma) << '\n';
    }
  }
}

void print_comparison(std::ostream& os, const ComparisonSummary& s) {
  auto steps = [](const std::optional<std::int64_t>& v) {
    return v ? std::to_string(*v) : std::string("not reached");
  };
  os << "algorithm " << to_string(s.algo) << ", threshold " << s.threshold_fraction
     << " x best = " << std::setprecision(6) << s.threshold << '\n';
  os << std::left << std::setw(13) << "mode" << std::setw(7) << "seeds" << std::setw(16)
     << "steps_to_thr" << std::setw(14) << "best_mean" << std::setw(14) << "final_mean"
     << "final_std\n";
  for (const ModeSummary* m : {&s.baseline, &s.equivariant}) {
    os << std::left << std::setw(13) << to_string(m->mode) << std::setw(7) << m->n_seeds
       << std::setw(16) << steps(m->steps_to_threshold) << std::setw(14) << m->best_mean
       << std::setw(14) << m->final_mean << m->final_std << '\n';
  }
  if (s.speedup) os << "speedup (baseline / equivariant steps): " << *s.speedup << "x\n";
  os << (s.improved ? "equivariant reaches the threshold earlier\n" : "no improvement\n");
}

std::string training_log_path(const std::string& dir, Algorithm algo, AgentMode mode,
                              std::uint64_t seed) {
  return dir + "/" + std::string(to_string(algo)) + "_" + std::string(to_string(mode)) + "_seed" +
         std::to_string(seed) + ".csv";
}

std::string policy_path(const std::string& dir, Algorithm algo, AgentMode mode,
                        std::uint64_t seed, const std::string& tag) {
  return dir + "/" + std::string(to_string(algo)) + "_" + std::string(to_string(mode)) + "_seed" +
         std::to_string(seed) + "_" + tag + ".policy";
}

}  // namespace eqrl
