#include "eqrl/replay_buffer.hpp"

#include <stdexcept>
#include <string>

namespace eqrl {

ReplayBuffer::ReplayBuffer(int obs_dim, std::size_t capacity)
    : obs_dim_(obs_dim), capacity_(capacity) {
  if (obs_dim <= 0 || capacity == 0) {
    throw std::invalid_argument("ReplayBuffer: obs_dim and capacity must be positive");
  }
}

void ReplayBuffer::add(const Transition& t) {
  if (t.obs.size() != obs_dim_ || t.next_obs.size() != obs_dim_) {
    throw std::invalid_argument("ReplayBuffer::add: observation has " +
                                std::to_string(t.obs.size()) + " entries, expected " +
                                std::to_string(obs_dim_));
  }
  const std::size_t d = static_cast<std::size_t>(obs_dim_);
  if (size_ < capacity_) {
    obs_.insert(obs_.end(), t.obs.data(), t.obs.data() + d);
    next_obs_.insert(next_obs_.end(), t.next_obs.data(), t.next_obs.data() + d);
    action_.insert(action_.end(), t.action.data(), t.action.data() + 4);
    prev_action_.insert(prev_action_.end(), t.prev_action.data(), t.prev_action.data() + 4);
    reward_.push_back(t.reward);
    done_.push_back(t.done ? 1.0 : 0.0);
    ++size_;
    next_ = size_ % capacity_;
    return;
  }
  const std::size_t i = next_;
  std::copy(t.obs.data(), t.obs.data() + d, obs_.begin() + i * d);
  std::copy(t.next_obs.data(), t.next_obs.data() + d, next_obs_.begin() + i * d);
  std::copy(t.action.data(), t.action.data() + 4, action_.begin() + i * 4);
  std::copy(t.prev_action.data(), t.prev_action.data() + 4, prev_action_.begin() + i * 4);
  reward_[i] = t.reward;
  done_[i] = t.done ? 1.0 : 0.0;
  next_ = (next_ + 1) % capacity_;
}

Transition ReplayBuffer::at(std::size_t i) const {
  if (i >= size_) throw std::out_of_range("ReplayBuffer::at");
  const std::size_t d = static_cast<std::size_t>(obs_dim_);
  Transition t;
  t.obs = Eigen::Map<const Eigen::VectorXd>(obs_.data() + i * d, obs_dim_);
  t.next_obs = Eigen::Map<const Eigen::VectorXd>(next_obs_.data() + i * d, obs_dim_);
  t.action = Eigen::Map<const Eigen::Vector4d>(action_.data() + i * 4);
  t.prev_action = Eigen::Map<const Eigen::Vector4d>(prev_action_.data() + i * 4);
  t.reward = reward_[i];
  t.done = done_[i] != 0.0;
  return t;
}

Batch ReplayBuffer::gather(const std::vector<std::size_t>& indices) const {
  const Eigen::Index n = static_cast<Eigen::Index>(indices.size());
  const std::size_t d = static_cast<std::size_t>(obs_dim_);
  Batch b;
  b.obs.resize(obs_dim_, n);
  b.next_obs.resize(obs_dim_, n);
  b.action.resize(4, n);
  b.reward.resize(n);
  b.done.resize(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const std::size_t i = indices[static_cast<std::size_t>(k)];
    if (i >= size_) throw std::out_of_range("ReplayBuffer::gather: index past filled region");
    b.obs.col(k) = Eigen::Map<const Eigen::VectorXd>(obs_.data() + i * d, obs_dim_);
    b.next_obs.col(k) = Eigen::Map<const Eigen::VectorXd>(next_obs_.data() + i * d, obs_dim_);
    b.action.col(k) = Eigen::Map<const Eigen::Vector4d>(action_.data() + i * 4);
    b.reward(k) = reward_[i];
    b.done(k) = done_[i];
  }
  return b;
}

Batch ReplayBuffer::sample(std::size_t batch_size, std::mt19937_64& rng) const {
  if (size_ == 0) throw std::logic_error("ReplayBuffer::sample: buffer is empty");
  std::uniform_int_distribution<std::size_t> pick(0, size_ - 1);
  std::vector<std::size_t> idx(batch_size);
  for (auto& i : idx) i = pick(rng);
  return gather(idx);
}

}  // namespace eqrl
