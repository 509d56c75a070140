#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "zsel/datasets.hpp"
#include "zsel/rng.hpp"
#include "zsel/selective.hpp"
#include "zsel/tensor.hpp"

// Dense network with Gaussian weight posteriors: each weight has a mean and
// a log standard deviation, every stochastic forward pass samples fresh
// weights, so repeated inference on one input yields a distribution of class
// scores.
namespace zsel::net {

enum class Activation : uint8_t { kIdentity = 0, kRelu = 1 };
enum class NoiseMode : uint8_t { kIndependent = 0, kFlipout = 1 };

// weight_log_std is clamped to [kLogStdFloor, kLogStdCeil] during training.
// The floor stands in for -inf: entries at or below it sample as exactly
// zero noise, so a floored model collapses to its deterministic path.
constexpr float kLogStdFloor = -10.0f;
constexpr float kLogStdCeil = 2.0f;

inline float noise_sigma(float log_std) {
  return log_std <= kLogStdFloor ? 0.0f : std::exp(log_std);
}

struct StochasticLayer {
  Tensor weight_mean;     // out x in
  Tensor weight_log_std;  // out x in
  Tensor bias;            // out
  Activation activation = Activation::kRelu;

  std::size_t out_dim() const { return weight_mean.rows(); }
  std::size_t in_dim() const { return weight_mean.cols(); }
};

struct StochasticModel {
  std::vector<StochasticLayer> layers;
  NoiseMode noise_mode = NoiseMode::kFlipout;

  std::size_t input_dim() const { return layers.front().in_dim(); }
  std::size_t num_classes() const { return layers.back().out_dim(); }
  void validate() const;  // throws when shapes do not compose
};

// Softmax probabilities are clamped into the open interval
// [kProbFloor, kProbCap] so that scores behave like the mathematical
// softmax: strictly below 1 even when float rounding would saturate.
constexpr double kProbFloor = 1e-12;
constexpr double kProbCap = 1.0 - 1e-7;

// Numerically stable softmax (max subtraction, double accumulation).
// Throws std::invalid_argument("non-finite logits") on non-finite input.
Tensor softmax(const Tensor& logits);

// He-uniform weight means, constant log-std init, zero bias; hidden layers
// relu, head identity (softmax is applied by the forward functions).
StochasticModel make_mlp(std::size_t input_dim,
                         const std::vector<std::size_t>& hidden,
                         std::size_t num_classes, NoiseMode mode,
                         uint64_t seed, float log_std_init = -5.0f);

Tensor forward_deterministic_logits(const StochasticModel& m, const Tensor& input);
Tensor forward_deterministic(const StochasticModel& m, const Tensor& input);

// One stochastic pass: every layer samples W = mean + sigma .* eps with eps
// standard normal from `rng`. Two calls with equal streams return identical
// scores.
Tensor forward_sample_logits(const StochasticModel& m, const Tensor& input, RngStream& rng);
Tensor forward_sample(const StochasticModel& m, const Tensor& input, RngStream& rng);

// n stochastic passes; row i is produced from the stream derived from
// (seed, i), so the matrix does not depend on evaluation order. n >= 2.
// softmax_space=false records raw logits instead of probabilities.
sel::ScoreMatrix sample_runs(const StochasticModel& m, const Tensor& input,
                             int n, uint64_t seed, bool softmax_space = true);

// KL(N(mu, sigma^2) || N(0,1)) summed over the layer's weights.
double kl_to_prior(const StochasticLayer& layer);
double kl_to_prior(const StochasticModel& m);

struct TrainConfig {
  int epochs = 20;
  int batch_size = 32;
  float learning_rate = 0.1f;
  float kl_weight = 1.0f;  // beta
  uint64_t seed = 0;
};

// One draw of all the noise a training step consumes, materialized so a loss
// evaluation can be repeated bit-for-bit (the finite-difference tests rely
// on this).
struct LayerNoise {
  Tensor base;        // flipout: shared perturbation, out x in
  Tensor sample_eps;  // independent: batch x (out*in)
  Tensor sign_out;    // flipout: batch x out, entries +-1
  Tensor sign_in;     // flipout: batch x in, entries +-1
};

struct NoiseDraw {
  NoiseMode mode = NoiseMode::kFlipout;
  std::size_t batch = 0;
  std::vector<LayerNoise> layers;
};

NoiseDraw draw_noise(const StochasticModel& m, std::size_t batch,
                     NoiseMode mode, RngStream& rng);

struct Gradients {
  struct Layer {
    Tensor d_mean, d_log_std, d_bias;
  };
  std::vector<Layer> layers;
};

// Loss = mean cross-entropy of one sampled pass over the batch
//        + kl_weight * KL(model) / dataset_size.
// Returns the loss; fills `grads` (pass nullptr to skip backprop).
double batch_loss_and_gradients(const StochasticModel& m, const float* inputs,
                                std::size_t batch, std::size_t dim,
                                const int* labels, const NoiseDraw& noise,
                                float kl_weight, std::size_t dataset_size,
                                Gradients* grads);

// Mini-batch SGD on the objective above; fully deterministic per cfg.seed.
// Appends the mean per-epoch loss to *epoch_losses when given.
StochasticModel train(StochasticModel model, const data::Dataset& ds,
                      const TrainConfig& cfg,
                      std::vector<double>* epoch_losses = nullptr);

// Fraction of samples whose deterministic-path argmax equals the label.
double deterministic_accuracy(const StochasticModel& m, const data::Dataset& ds);

// Checkpoint file: magic "ZSELMDL1", u32 layer count, per layer u32 out/in
// dims, u8 activation tag, then mean / log-std / bias as raw little-endian
// f32, and finally one noise-mode flag byte (flipout=1, independent=0).
void save_model(const std::string& path, const StochasticModel& m);
StochasticModel load_model(const std::string& path);

}  // namespace zsel::net
