#include "zsel/net.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "zsel/kernels.hpp"

namespace zsel::net {

void StochasticModel::validate() const {
  if (layers.empty()) throw std::invalid_argument("model has no layers");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& layer = layers[l];
    const std::size_t out = layer.out_dim(), in = layer.in_dim();
    if (out == 0 || in == 0) throw std::invalid_argument("empty layer");
    if (layer.weight_log_std.rows() != out || layer.weight_log_std.cols() != in) {
      throw std::invalid_argument("weight_log_std shape mismatch");
    }
    if (layer.bias.numel() != out) throw std::invalid_argument("bias shape mismatch");
    if (l > 0 && layers[l - 1].out_dim() != in) {
      throw std::invalid_argument("adjacent layer shapes do not compose");
    }
  }
  if (num_classes() < 2) throw std::invalid_argument("model needs at least two classes");
}

Tensor softmax(const Tensor& logits) {
  const std::size_t n = logits.numel();
  if (n < 2) throw std::invalid_argument("softmax needs at least two logits");
  for (float v : logits.data) {
    if (!std::isfinite(v)) throw std::invalid_argument("non-finite logits");
  }

  float max_logit = logits[0];
  for (std::size_t i = 1; i < n; ++i) max_logit = std::max(max_logit, logits[i]);

  std::vector<double> e(n);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    e[i] = std::exp(double(logits[i]) - double(max_logit));
    sum += e[i];
  }

  Tensor out({n});
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = float(std::clamp(e[i] / sum, kProbFloor, kProbCap));
  }
  return out;
}

StochasticModel make_mlp(std::size_t input_dim,
                         const std::vector<std::size_t>& hidden,
                         std::size_t num_classes, NoiseMode mode,
                         uint64_t seed, float log_std_init) {
  if (input_dim == 0 || num_classes < 2) {
    throw std::invalid_argument("bad mlp dimensions");
  }

  std::vector<std::size_t> widths;
  widths.push_back(input_dim);
  widths.insert(widths.end(), hidden.begin(), hidden.end());
  widths.push_back(num_classes);

  RngStream rng = RngStream::derive(seed, 0x11717);
  StochasticModel m;
  m.noise_mode = mode;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    StochasticLayer layer;
    const std::size_t in = widths[l], out = widths[l + 1];
    layer.weight_mean = Tensor({out, in});
    layer.weight_log_std = Tensor::full({out, in}, log_std_init);
    layer.bias = Tensor({out});
    layer.activation =
        l + 2 == widths.size() ? Activation::kIdentity : Activation::kRelu;
    const float limit = std::sqrt(6.0f / float(in));  // He-uniform
    for (auto& w : layer.weight_mean.data) {
      w = float((rng.uniform() * 2.0 - 1.0) * limit);
    }
    m.layers.push_back(std::move(layer));
  }
  m.validate();
  return m;
}

namespace {

void check_input(const StochasticModel& m, const Tensor& input) {
  if (input.numel() != m.input_dim()) {
    throw std::invalid_argument("input size does not match the first layer");
  }
}

inline void apply_activation(Activation act, float* v, std::size_t n) {
  if (act == Activation::kRelu) {
    for (std::size_t i = 0; i < n; ++i) v[i] = v[i] > 0.0f ? v[i] : 0.0f;
  }
}

// Per-layer sigma with the floor flushed to exactly zero.
std::vector<float> sigma_of(const StochasticLayer& layer) {
  std::vector<float> sigma(layer.weight_log_std.numel());
  for (std::size_t i = 0; i < sigma.size(); ++i) {
    sigma[i] = noise_sigma(layer.weight_log_std.data[i]);
  }
  return sigma;
}

}  // namespace

Tensor forward_deterministic_logits(const StochasticModel& m, const Tensor& input) {
  m.validate();
  check_input(m, input);
  Tensor cur = input;
  for (const auto& layer : m.layers) {
    Tensor next({layer.out_dim()});
    kernels::matvec(layer.weight_mean.data.data(), cur.data.data(),
                    layer.bias.data.data(), next.data.data(), layer.out_dim(),
                    layer.in_dim());
    apply_activation(layer.activation, next.data.data(), next.numel());
    cur = std::move(next);
  }
  return cur;
}

Tensor forward_deterministic(const StochasticModel& m, const Tensor& input) {
  return softmax(forward_deterministic_logits(m, input));
}

Tensor forward_sample_logits(const StochasticModel& m, const Tensor& input,
                             RngStream& rng) {
  m.validate();
  check_input(m, input);

  std::vector<float> eps;
  Tensor cur = input;
  for (const auto& layer : m.layers) {
    const std::size_t count = layer.weight_mean.numel();
    const std::vector<float> sigma = sigma_of(layer);

    // The noise is drawn row-major up front so the consuming kernel cannot
    // change the stream, whatever backend is active.
    eps.resize(count);
    bool all_flushed = true;
    for (float s : sigma) {
      if (s != 0.0f) {
        all_flushed = false;
        break;
      }
    }
    for (auto& e : eps) e = rng.normal();

    Tensor next({layer.out_dim()});
    if (all_flushed) {
      // Zero-variance collapse: identical arithmetic to the deterministic path.
      kernels::matvec(layer.weight_mean.data.data(), cur.data.data(),
                      layer.bias.data.data(), next.data.data(), layer.out_dim(),
                      layer.in_dim());
    } else {
      kernels::matvec_sampled(layer.weight_mean.data.data(), sigma.data(),
                              eps.data(), cur.data.data(), layer.bias.data.data(),
                              next.data.data(), layer.out_dim(), layer.in_dim());
    }
    apply_activation(layer.activation, next.data.data(), next.numel());
    cur = std::move(next);
  }
  return cur;
}

Tensor forward_sample(const StochasticModel& m, const Tensor& input, RngStream& rng) {
  return softmax(forward_sample_logits(m, input, rng));
}

sel::ScoreMatrix sample_runs(const StochasticModel& m, const Tensor& input,
                             int n, uint64_t seed, bool softmax_space) {
  if (n < 2) {
    throw std::invalid_argument("need at least two passes for a standard deviation");
  }
  m.validate();
  check_input(m, input);

  sel::ScoreMatrix mat;
  mat.passes = n;
  mat.classes = int(m.num_classes());
  mat.values.resize(std::size_t(n) * mat.classes);
  for (int pass = 0; pass < n; ++pass) {
    RngStream rng = RngStream::derive(seed, uint64_t(pass));
    const Tensor scores = softmax_space ? forward_sample(m, input, rng)
                                        : forward_sample_logits(m, input, rng);
    std::copy(scores.data.begin(), scores.data.end(),
              mat.values.begin() + std::size_t(pass) * mat.classes);
  }
  return mat;
}

double kl_to_prior(const StochasticLayer& layer) {
  // KL(N(mu, sigma^2) || N(0,1)) = 0.5*(mu^2 + sigma^2 - 1) - log(sigma),
  // summed over the weight entries. Uses the stored log-std (not the flushed
  // sampling sigma) so the value stays finite at the floor.
  double kl = 0.0;
  for (std::size_t i = 0; i < layer.weight_mean.numel(); ++i) {
    const double mu = layer.weight_mean.data[i];
    const double rho = layer.weight_log_std.data[i];
    kl += 0.5 * (mu * mu + std::exp(2.0 * rho) - 1.0) - rho;
  }
  return kl;
}

double kl_to_prior(const StochasticModel& m) {
  double kl = 0.0;
  for (const auto& layer : m.layers) kl += kl_to_prior(layer);
  return kl;
}

}  // namespace zsel::net
