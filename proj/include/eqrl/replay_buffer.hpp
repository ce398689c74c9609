#pragma once

#include <cstddef>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace eqrl {

// One environment transition in encoded form. Actions are stored on the
// actor's [-1, 1] scale; prev_action is in newtons and only kept for
// diagnostics.
struct Transition {
  Eigen::VectorXd obs;
  Eigen::Vector4d action = Eigen::Vector4d::Zero();
  double reward = 0.0;
  Eigen::VectorXd next_obs;
  bool done = false;
  Eigen::Vector4d prev_action = Eigen::Vector4d::Zero();
};

// Columns are samples.
struct Batch {
  Eigen::MatrixXd obs;
  Eigen::MatrixXd action;
  Eigen::RowVectorXd reward;
  Eigen::MatrixXd next_obs;
  Eigen::RowVectorXd done;  // 1.0 for terminal transitions
};

// Fixed-capacity ring buffer. Storage grows on demand up to capacity so
// short runs do not pay for a 10^6-entry allocation.
class ReplayBuffer {
 public:
  ReplayBuffer(int obs_dim, std::size_t capacity);

  void add(const Transition& t);
  std::size_t size() const { return size_; }
  std::size_t capacity() const { return capacity_; }
  int obs_dim() const { return obs_dim_; }

  Transition at(std::size_t i) const;

  /// Uniform sample with replacement over filled entries.
  Batch sample(std::size_t batch_size, std::mt19937_64& rng) const;
  Batch gather(const std::vector<std::size_t>& indices) const;

 private:
  int obs_dim_;
  std::size_t capacity_;
  std::size_t size_ = 0;
  std::size_t next_ = 0;
  std::vector<double> obs_, action_, reward_, next_obs_, done_, prev_action_;
};

}  // namespace eqrl
