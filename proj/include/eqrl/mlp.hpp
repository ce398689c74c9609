#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace eqrl {

enum class Activation : std::uint32_t { identity = 0, relu = 1, tanh = 2 };

struct DenseLayer {
  Eigen::MatrixXd weight;  // out x in
  Eigen::VectorXd bias;    // out
  Activation activation = Activation::identity;
};

// Per-parameter gradients, shaped like the network's layers.
struct MlpGradient {
  std::vector<Eigen::MatrixXd> weight;
  std::vector<Eigen::VectorXd> bias;

  MlpGradient& operator+=(const MlpGradient& other);
  MlpGradient& operator*=(double s);
};

class Mlp;

// Activations saved by a forward pass. Columns are batch samples.
struct ForwardCache {
  std::vector<Eigen::MatrixXd> inputs;  // input to each layer
  std::vector<Eigen::MatrixXd> pre;     // pre-activation of each layer
  Eigen::MatrixXd output;
  std::uint64_t stamp = 0;              // parameter version of the producing net
};

// Fully connected network. Inputs and outputs are column-per-sample matrices.
class Mlp {
 public:
  Mlp() = default;
  /// sizes = {in, h1, ..., out}; one activation per layer. Parameters start at zero.
  Mlp(std::vector<int> sizes, std::vector<Activation> activations);

  /// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) for weights and biases. If
  /// final_bound > 0 the last layer uses Uniform(-final_bound, final_bound).
  void init_uniform(std::mt19937_64& rng, double final_bound = 0.0);

  int input_dim() const;
  int output_dim() const;
  std::vector<int> sizes() const;
  std::size_t num_layers() const { return layers_.size(); }
  std::size_t num_parameters() const;

  const std::vector<DenseLayer>& layers() const { return layers_; }
  /// Mutable access; invalidates every outstanding ForwardCache.
  std::vector<DenseLayer>& mutable_layers();
  std::uint64_t stamp() const { return stamp_; }

  Eigen::MatrixXd forward(const Eigen::MatrixXd& input) const;
  Eigen::MatrixXd forward(const Eigen::MatrixXd& input, ForwardCache& cache) const;

  /// Reverse-mode pass for upstream gradient dL/d(output). Returns parameter
  /// gradients; writes dL/d(input) when grad_input is non-null. ReLU uses
  /// subgradient 0 at exactly zero pre-activation. Throws std::logic_error if
  /// the cache came from different parameters or shapes.
  MlpGradient backward(const ForwardCache& cache, const Eigen::MatrixXd& grad_output,
                       Eigen::MatrixXd* grad_input = nullptr) const;

  MlpGradient zero_gradient() const;

  /// this <- tau * online + (1 - tau) * this, parameter-wise.
  void soft_update_from(const Mlp& online, double tau);

  /// Binary snapshot: "EQRLMLP1", u32 layer count L, (L + 1) u32 sizes,
  /// L u32 activation tags, then per layer the weights row-major followed by
  /// the biases, all as little-endian IEEE-754 doubles.
  void save(std::ostream& os) const;
  static Mlp load(std::istream& is);
  void save_file(const std::string& path) const;
  static Mlp load_file(const std::string& path);

  bool operator==(const Mlp& other) const;

 private:
  void touch();

  std::vector<DenseLayer> layers_;
  std::uint64_t stamp_ = 0;
};

// Bias-corrected Adam over all parameters of one network.
struct AdamState {
  std::vector<Eigen::MatrixXd> m_weight, v_weight;
  std::vector<Eigen::VectorXd> m_bias, v_bias;
  std::int64_t step = 0;
  double lr = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  static AdamState for_network(const Mlp& net, double lr = 3e-4);
};

/// One Adam update. Throws std::invalid_argument on shape mismatch.
void adam_step(Mlp& net, const MlpGradient& grad, AdamState& state);

// Adam for a single scalar (the SAC log-temperature).
struct ScalarAdam {
  double m = 0.0;
  double v = 0.0;
  std::int64_t step = 0;
  double lr = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  double update(double param, double grad);
};

// Diagonal Gaussian over pre-squash actions.
struct GaussianHead {
  static constexpr double kLogStdMin = -20.0;
  static constexpr double kLogStdMax = 2.0;

  Eigen::VectorXd mean;
  Eigen::VectorXd log_std;  // clamped to [kLogStdMin, kLogStdMax] by make()

  static GaussianHead make(Eigen::VectorXd mean, Eigen::VectorXd raw_log_std);
};

struct SquashedSample {
  Eigen::VectorXd pre_tanh;  // z = mean + std * noise
  Eigen::VectorXd action;    // tanh(z)
  double log_prob = 0.0;     // log density of `action`, tanh Jacobian included
};

/// Deterministic core of the sampler: reparameterized draw for given noise.
SquashedSample squash_sample(const GaussianHead& head, const Eigen::VectorXd& noise);

/// Draws noise ~ N(0, I) and returns the squashed sample.
SquashedSample sample_gaussian_head(const GaussianHead& head, std::mt19937_64& rng);

/// log(1 - tanh(z)^2), evaluated stably for large |z|.
double log1m_tanh_sq(double z);

}  // namespace eqrl
