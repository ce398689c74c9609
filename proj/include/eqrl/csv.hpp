#pragma once

#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "eqrl/environment.hpp"
#include "eqrl/trainer.hpp"

namespace eqrl {

// Frozen column orders.
inline constexpr std::string_view kTrainingLogHeader =
    "algo,mode,seed,env_step,eval_mean_return,eval_std_return,mean_terminal_error_m,wall_time_s";
inline constexpr std::string_view kTrajectoryHeader =
    "episode,t,x1,x2,x3,v1,v2,v3,R11,R12,R13,R21,R22,R23,R31,R32,R33,"
    "Omega1,Omega2,Omega3,T1,T2,T3,T4,reward,done_reason";
inline constexpr std::string_view kComparisonHeader = "step,mode,mean,two_sigma";

/// Shortest round-trippable decimal form of a double ("%.17g").
std::string format_double(double v);

std::vector<std::string> split_csv_line(const std::string& line);

void write_training_log(std::ostream& os, const TrainingLog& log);
void write_training_log(const std::string& path, const TrainingLog& log);
/// Throws std::runtime_error on a missing file, wrong header or bad row.
TrainingLog read_training_log(const std::string& path);

/// One trajectory row: the state at time t, the thrusts applied from it,
/// and the reward/termination of that step.
void write_trajectory_row(std::ostream& os, int episode, double t, const State& s,
                          const StepResult& r);

}  // namespace eqrl
