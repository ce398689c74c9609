#include "eqrl/mlp.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace eqrl {

static_assert(std::endian::native == std::endian::little,
              "snapshot I/O assumes a little-endian host");

namespace {

std::atomic<std::uint64_t> g_stamp{1};

constexpr char kMagic[8] = {'E', 'Q', 'R', 'L', 'M', 'L', 'P', '1'};

void apply_activation(Activation act, const Eigen::MatrixXd& pre, Eigen::MatrixXd& out) {
  switch (act) {
    case Activation::identity: out = pre; break;
    case Activation::relu: out = pre.cwiseMax(0.0); break;
    case Activation::tanh: out = pre.array().tanh(); break;
  }
}

template <typename T>
void write_pod(std::ostream& os, T value) {
  os.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_pod(std::istream& is) {
  T value{};
  is.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!is) throw std::runtime_error("Mlp::load: truncated snapshot");
  return value;
}

}  // namespace

MlpGradient& MlpGradient::operator+=(const MlpGradient& other) {
  for (std::size_t i = 0; i < weight.size(); ++i) {
    weight[i] += other.weight[i];
    bias[i] += other.bias[i];
  }
  return *this;
}

MlpGradient& MlpGradient::operator*=(double s) {
  for (std::size_t i = 0; i < weight.size(); ++i) {
    weight[i] *= s;
    bias[i] *= s;
  }
  return *this;
}

Mlp::Mlp(std::vector<int> sizes, std::vector<Activation> activations) {
  if (sizes.size() < 2 || activations.size() != sizes.size() - 1) {
    throw std::invalid_argument("Mlp: need {in, ..., out} sizes and one activation per layer");
  }
  for (int s : sizes) {
    if (s <= 0) throw std::invalid_argument("Mlp: layer sizes must be positive");
  }
  layers_.resize(activations.size());
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    layers_[l].weight = Eigen::MatrixXd::Zero(sizes[l + 1], sizes[l]);
    layers_[l].bias = Eigen::VectorXd::Zero(sizes[l + 1]);
    layers_[l].activation = activations[l];
  }
  touch();
}

void Mlp::touch() { stamp_ = g_stamp.fetch_add(1, std::memory_order_relaxed); }

void Mlp::init_uniform(std::mt19937_64& rng, double final_bound) {
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    DenseLayer& layer = layers_[l];
    double bound = 1.0 / std::sqrt(static_cast<double>(layer.weight.cols()));
    if (l + 1 == layers_.size() && final_bound > 0.0) bound = final_bound;
    std::uniform_real_distribution<double> dist(-bound, bound);
    // Row-major draw order keeps the stream independent of Eigen's storage order.
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) layer.weight(r, c) = dist(rng);
    }
    for (Eigen::Index r = 0; r < layer.bias.size(); ++r) layer.bias(r) = dist(rng);
  }
  touch();
}

int Mlp::input_dim() const { return layers_.empty() ? 0 : static_cast<int>(layers_.front().weight.cols()); }
int Mlp::output_dim() const { return layers_.empty() ? 0 : static_cast<int>(layers_.back().weight.rows()); }

std::vector<int> Mlp::sizes() const {
  std::vector<int> s;
  if (layers_.empty()) return s;
  s.push_back(input_dim());
  for (const auto& l : layers_) s.push_back(static_cast<int>(l.weight.rows()));
  return s;
}

std::size_t Mlp::num_parameters() const {
  std::size_t n = 0;
  for (const auto& l : layers_) n += l.weight.size() + l.bias.size();
  return n;
}

std::vector<DenseLayer>& Mlp::mutable_layers() {
  touch();
  return layers_;
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& input) const {
  if (input.rows() != input_dim()) {
    throw std::invalid_argument("Mlp::forward: input has " + std::to_string(input.rows()) +
                                " rows, network expects " + std::to_string(input_dim()));
  }
  Eigen::MatrixXd x = input;
  Eigen::MatrixXd pre;
  for (const auto& layer : layers_) {
    pre.noalias() = layer.weight * x;
    pre.colwise() += layer.bias;
    apply_activation(layer.activation, pre, x);
  }
  return x;
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& input, ForwardCache& cache) const {
  if (input.rows() != input_dim()) {
    throw std::invalid_argument("Mlp::forward: input has " + std::to_string(input.rows()) +
                                " rows, network expects " + std::to_string(input_dim()));
  }
  const std::size_t L = layers_.size();
  cache.inputs.resize(L);
  cache.pre.resize(L);
  cache.stamp = stamp_;
  cache.inputs[0] = input;
  for (std::size_t l = 0; l < L; ++l) {
    const DenseLayer& layer = layers_[l];
    cache.pre[l].noalias() = layer.weight * cache.inputs[l];
    cache.pre[l].colwise() += layer.bias;
    Eigen::MatrixXd& dst = (l + 1 < L) ? cache.inputs[l + 1] : cache.output;
    apply_activation(layer.activation, cache.pre[l], dst);
  }
  return cache.output;
}

MlpGradient Mlp::backward(const ForwardCache& cache, const Eigen::MatrixXd& grad_output,
                          Eigen::MatrixXd* grad_input) const {
  const std::size_t L = layers_.size();
  if (cache.stamp != stamp_ || cache.pre.size() != L || cache.inputs.size() != L) {
    throw std::logic_error("Mlp::backward: cache does not belong to the current parameters");
  }
  if (grad_output.rows() != output_dim() || grad_output.cols() != cache.output.cols()) {
    throw std::invalid_argument("Mlp::backward: upstream gradient shape mismatch");
  }
  MlpGradient g;
  g.weight.resize(L);
  g.bias.resize(L);
  Eigen::MatrixXd delta = grad_output;
  for (std::size_t i = L; i-- > 0;) {
    const DenseLayer& layer = layers_[i];
    switch (layer.activation) {
      case Activation::identity: break;
      case Activation::relu:
        delta.array() *= (cache.pre[i].array() > 0.0).cast<double>();
        break;
      case Activation::tanh: {
        const Eigen::MatrixXd& y = (i + 1 < L) ? cache.inputs[i + 1] : cache.output;
        delta.array() *= 1.0 - y.array().square();
        break;
      }
    }
    g.weight[i].noalias() = delta * cache.inputs[i].transpose();
    g.bias[i] = delta.rowwise().sum();
    if (i > 0 || grad_input != nullptr) {
      Eigen::MatrixXd next;
      next.noalias() = layer.weight.transpose() * delta;
      delta.swap(next);
    }
  }
  if (grad_input != nullptr) *grad_input = std::move(delta);
  return g;
}

MlpGradient Mlp::zero_gradient() const {
  MlpGradient g;
  for (const auto& l : layers_) {
    g.weight.push_back(Eigen::MatrixXd::Zero(l.weight.rows(), l.weight.cols()));
    g.bias.push_back(Eigen::VectorXd::Zero(l.bias.size()));
  }
  return g;
}

void Mlp::soft_update_from(const Mlp& online, double tau) {
  if (online.sizes() != sizes()) throw std::invalid_argument("soft_update_from: shape mismatch");
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    layers_[l].weight = tau * online.layers_[l].weight + (1.0 - tau) * layers_[l].weight;
    layers_[l].bias = tau * online.layers_[l].bias + (1.0 - tau) * layers_[l].bias;
  }
  touch();
}

void Mlp::save(std::ostream& os) const {
  os.write(kMagic, sizeof(kMagic));
  write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(layers_.size()));
  for (int s : sizes()) write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(s));
  for (const auto& l : layers_) write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(l.activation));
  for (const auto& l : layers_) {
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c) write_pod<double>(os, l.weight(r, c));
    }
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) write_pod<double>(os, l.bias(r));
  }
  if (!os) throw std::runtime_error("Mlp::save: write failed");
}

Mlp Mlp::load(std::istream& is) {
  char magic[8];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw std::runtime_error("Mlp::load: not an eqrl network snapshot");
  }
  const auto n_layers = read_pod<std::uint32_t>(is);
  if (n_layers == 0 || n_layers > 64) throw std::runtime_error("Mlp::load: bad layer count");
  std::vector<int> sizes(n_layers + 1);
  for (auto& s : sizes) {
    s = static_cast<int>(read_pod<std::uint32_t>(is));
    if (s <= 0 || s > (1 << 20)) throw std::runtime_error("Mlp::load: bad layer size");
  }
  std::vector<Activation> acts(n_layers);
  for (auto& a : acts) {
    const auto tag = read_pod<std::uint32_t>(is);
    if (tag > 2) throw std::runtime_error("Mlp::load: unknown activation tag");
    a = static_cast<Activation>(tag);
  }
  Mlp net(sizes, acts);
  for (auto& l : net.layers_) {
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c) l.weight(r, c) = read_pod<double>(is);
    }
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) l.bias(r) = read_pod<double>(is);
  }
  net.touch();
  return net;
}

void Mlp::save_file(const std::string& path) const {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("Mlp::save_file: cannot open " + path);
  save(os);
}

Mlp Mlp::load_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("Mlp::load_file: cannot open " + path);
  return load(is);
}

bool Mlp::operator==(const Mlp& other) const {
  if (layers_.size() != other.layers_.size()) return false;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& a = layers_[l];
    const auto& b = other.layers_[l];
    if (a.activation != b.activation || a.weight.rows() != b.weight.rows() ||
        a.weight.cols() != b.weight.cols() || a.weight != b.weight || a.bias != b.bias) {
      return false;
    }
  }
  return true;
}

AdamState AdamState::for_network(const Mlp& net, double lr) {
  AdamState s;
  s.lr = lr;
  for (const auto& l : net.layers()) {
    s.m_weight.push_back(Eigen::MatrixXd::Zero(l.weight.rows(), l.weight.cols()));
    s.v_weight.push_back(Eigen::MatrixXd::Zero(l.weight.rows(), l.weight.cols()));
    s.m_bias.push_back(Eigen::VectorXd::Zero(l.bias.size()));
    s.v_bias.push_back(Eigen::VectorXd::Zero(l.bias.size()));
  }
  return s;
}

namespace {

template <typename P, typename G, typename M>
void adam_apply(P& param, const G& grad, M& m, M& v, const AdamState& s, double c1, double c2) {
  m = s.beta1 * m + (1.0 - s.beta1) * grad;
  v = s.beta2 * v + (1.0 - s.beta2) * grad.cwiseProduct(grad);
  param.array() -= s.lr * (m.array() / c1) / ((v.array() / c2).sqrt() + s.eps);
}

}  // namespace

void adam_step(Mlp& net, const MlpGradient& grad, AdamState& state) {
  const auto& layers = net.layers();
  if (grad.weight.size() != layers.size() || grad.bias.size() != layers.size() ||
      state.m_weight.size() != layers.size()) {
    throw std::invalid_argument("adam_step: layer count mismatch");
  }
  for (std::size_t l = 0; l < layers.size(); ++l) {
    if (grad.weight[l].rows() != layers[l].weight.rows() ||
        grad.weight[l].cols() != layers[l].weight.cols() ||
        grad.bias[l].size() != layers[l].bias.size() ||
        state.m_weight[l].rows() != layers[l].weight.rows() ||
        state.m_weight[l].cols() != layers[l].weight.cols()) {
      throw std::invalid_argument("adam_step: shape mismatch in layer " + std::to_string(l));
    }
  }
  ++state.step;
  const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  auto& mut = net.mutable_layers();
  for (std::size_t l = 0; l < mut.size(); ++l) {
    adam_apply(mut[l].weight, grad.weight[l], state.m_weight[l], state.v_weight[l], state, c1, c2);
    adam_apply(mut[l].bias, grad.bias[l], state.m_bias[l], state.v_bias[l], state, c1, c2);
  }
}

double ScalarAdam::update(double param, double grad) {
  ++step;
  m = beta1 * m + (1.0 - beta1) * grad;
  v = beta2 * v + (1.0 - beta2) * grad * grad;
  const double mhat = m / (1.0 - std::pow(beta1, static_cast<double>(step)));
  const double vhat = v / (1.0 - std::pow(beta2, static_cast<double>(step)));
  return param - lr * mhat / (std::sqrt(vhat) + eps);
}

GaussianHead GaussianHead::make(Eigen::VectorXd mean, Eigen::VectorXd raw_log_std) {
  if (mean.size() != raw_log_std.size()) {
    throw std::invalid_argument("GaussianHead: mean and log-std sizes differ");
  }
  GaussianHead h;
  h.mean = std::move(mean);
  h.log_std = raw_log_std.cwiseMax(kLogStdMin).cwiseMin(kLogStdMax);
  return h;
}

double log1m_tanh_sq(double z) {
  // 1 - tanh(z)^2 = 4 / (e^z + e^-z)^2  =>  2 (log 2 - |z| - log1p(e^{-2|z|})).
  const double a = std::abs(z);
  return 2.0 * (std::log(2.0) - a - std::log1p(std::exp(-2.0 * a)));
}

SquashedSample squash_sample(const GaussianHead& head, const Eigen::VectorXd& noise) {
  if (noise.size() != head.mean.size()) {
    throw std::invalid_argument("squash_sample: noise dimension mismatch");
  }
  constexpr double kHalfLog2Pi = 0.91893853320467274178;
  SquashedSample s;
  s.pre_tanh = head.mean.array() + head.log_std.array().exp() * noise.array();
  // tanh rounds to +-1 in double for |z| > ~19; keep samples strictly inside.
  const double edge = std::nextafter(1.0, 0.0);
  s.action = s.pre_tanh.array().tanh().cwiseMax(-edge).cwiseMin(edge);
  double lp = 0.0;
  for (Eigen::Index i = 0; i < noise.size(); ++i) {
    lp += -0.5 * noise(i) * noise(i) - head.log_std(i) - kHalfLog2Pi - log1m_tanh_sq(s.pre_tanh(i));
  }
  s.log_prob = lp;
  return s;
}

SquashedSample sample_gaussian_head(const GaussianHead& head, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd noise(head.mean.size());
  for (Eigen::Index i = 0; i < noise.size(); ++i) noise(i) = normal(rng);
  return squash_sample(head, noise);
}

}  // namespace eqrl
