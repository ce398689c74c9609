#include "eqrl/csv.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace eqrl {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

void write_training_log(std::ostream& os, const TrainingLog& log) {
  os << kTrainingLogHeader << '\n';
  for (const EvalRow& r : log.rows) {
    os << to_string(log.algo) << ',' << to_string(log.mode) << ',' << log.seed << ','
       << r.env_step << ',' << format_double(r.mean_return) << ',' << format_double(r.std_return)
       << ',' << format_double(r.mean_terminal_error) << ',' << format_double(r.wall_time_s)
       << '\n';
  }
}

void write_training_log(const std::string& path, const TrainingLog& log) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path);
  write_training_log(os, log);
  if (!os) throw std::runtime_error("write failed: " + path);
}

TrainingLog read_training_log(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("training log not found: " + path);
  std::string line;
  if (!std::getline(is, line) || line != kTrainingLogHeader) {
    throw std::runtime_error(path + ": unexpected header");
  }
  TrainingLog log;
  int line_no = 1;
  bool first = true;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 8) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": expected 8 columns");
    }
    try {
      const Algorithm algo = parse_algorithm(f[0]);
      const AgentMode mode = parse_mode(f[1]);
      const std::uint64_t seed = std::stoull(f[2]);
      if (first) {
        log.algo = algo;
        log.mode = mode;
        log.seed = seed;
        first = false;
      } else if (algo != log.algo || mode != log.mode || seed != log.seed) {
        throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                 ": algo/mode/seed differ from the first row");
      }
      EvalRow r;
      r.env_step = std::stoll(f[3]);
      r.mean_return = std::stod(f[4]);
      r.std_return = std::stod(f[5]);
      r.mean_terminal_error = std::stod(f[6]);
      r.wall_time_s = std::stod(f[7]);
      log.rows.push_back(r);
    } catch (const std::runtime_error&) {
      throw;
    } catch (const std::exception& e) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return log;
}

void write_trajectory_row(std::ostream& os, int episode, double t, const State& s,
                          const StepResult& r) {
  os << episode << ',' << format_double(t);
  for (int i = 0; i < 3; ++i) os << ',' << format_double(s.x(i));
  for (int i = 0; i < 3; ++i) os << ',' << format_double(s.v(i));
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) os << ',' << format_double(s.R(i, j));
  }
  for (int i = 0; i < 3; ++i) os << ',' << format_double(s.Omega(i));
  for (int i = 0; i < 4; ++i) os << ',' << format_double(r.action.thrust(i));
  os << ',' << format_double(r.reward) << ',' << to_string(r.done_reason) << '\n';
}

}  // namespace eqrl
