#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "zsel/kernels.hpp"
#include "zsel/net.hpp"

namespace zsel::net {

namespace {

std::vector<float> sigma_of(const StochasticLayer& layer) {
  std::vector<float> sigma(layer.weight_log_std.numel());
  for (std::size_t i = 0; i < sigma.size(); ++i) {
    sigma[i] = noise_sigma(layer.weight_log_std.data[i]);
  }
  return sigma;
}

// Stable softmax of one logits row, double precision; returns the CE loss
// for `label` and writes dL/dlogits (for a 1/scale-weighted sample).
double softmax_ce_grad(const float* logits, std::size_t n, int label,
                       float inv_batch, float* dlogits) {
  double max_logit = logits[0];
  for (std::size_t i = 1; i < n; ++i) max_logit = std::max(max_logit, double(logits[i]));
  double sum = 0.0;
  std::vector<double> e(n);
  for (std::size_t i = 0; i < n; ++i) {
    e[i] = std::exp(double(logits[i]) - max_logit);
    sum += e[i];
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double p = e[i] / sum;
    dlogits[i] = float((p - (int(i) == label ? 1.0 : 0.0)) * inv_batch);
  }
  const double p_label = std::max(e[label] / sum, kProbFloor);
  return -std::log(p_label);
}

}  // namespace

NoiseDraw draw_noise(const StochasticModel& m, std::size_t batch,
                     NoiseMode mode, RngStream& rng) {
  if (batch == 0) throw std::invalid_argument("empty batch");
  NoiseDraw draw;
  draw.mode = mode;
  draw.batch = batch;
  draw.layers.resize(m.layers.size());
  for (std::size_t l = 0; l < m.layers.size(); ++l) {
    const auto& layer = m.layers[l];
    auto& ln = draw.layers[l];
    const std::size_t out = layer.out_dim(), in = layer.in_dim();
    if (mode == NoiseMode::kFlipout) {
      ln.base = Tensor({out, in});
      for (auto& v : ln.base.data) v = rng.normal();
      ln.sign_out = Tensor({batch, out});
      for (auto& v : ln.sign_out.data) v = rng.sign();
      ln.sign_in = Tensor({batch, in});
      for (auto& v : ln.sign_in.data) v = rng.sign();
    } else {
      ln.sample_eps = Tensor({batch, out * in});
      for (auto& v : ln.sample_eps.data) v = rng.normal();
    }
  }
  return draw;
}

double batch_loss_and_gradients(const StochasticModel& m, const float* inputs,
                                std::size_t batch, std::size_t dim,
                                const int* labels, const NoiseDraw& noise,
                                float kl_weight, std::size_t dataset_size,
                                Gradients* grads) {
  m.validate();
  if (batch == 0) throw std::invalid_argument("empty batch");
  if (dim != m.input_dim()) throw std::invalid_argument("batch dim mismatch");
  if (noise.batch != batch || noise.layers.size() != m.layers.size() ||
      noise.mode != m.noise_mode) {
    throw std::invalid_argument("noise draw does not match model/batch");
  }
  if (dataset_size == 0) throw std::invalid_argument("dataset_size must be > 0");
  const std::size_t n_classes = m.num_classes();
  for (std::size_t s = 0; s < batch; ++s) {
    if (labels[s] < 0 || std::size_t(labels[s]) >= n_classes) {
      throw std::invalid_argument("label out of range");
    }
  }

  const std::size_t n_layers = m.layers.size();

  // Per-layer sampled-weight scratch.
  std::vector<std::vector<float>> sigmas(n_layers);
  std::vector<std::vector<float>> delta(n_layers);  // flipout: sigma .* base
  for (std::size_t l = 0; l < n_layers; ++l) {
    sigmas[l] = sigma_of(m.layers[l]);
    if (m.noise_mode == NoiseMode::kFlipout) {
      delta[l].resize(sigmas[l].size());
      kernels::hadamard(sigmas[l].data(), noise.layers[l].base.data.data(),
                        delta[l].data(), sigmas[l].size());
    }
  }

  // acts[l]: inputs of layer l (batch-major); acts[n_layers]: final logits.
  std::vector<std::vector<float>> acts(n_layers + 1);
  acts[0].assign(inputs, inputs + batch * dim);
  // flipout per-layer, per-sample u = sign_in .* x, saved for backward.
  std::vector<std::vector<float>> flip_u(n_layers);

  for (std::size_t l = 0; l < n_layers; ++l) {
    const auto& layer = m.layers[l];
    const std::size_t out = layer.out_dim(), in = layer.in_dim();
    acts[l + 1].resize(batch * out);
    if (m.noise_mode == NoiseMode::kFlipout) flip_u[l].resize(batch * in);

    std::vector<float> pert(out);
    for (std::size_t s = 0; s < batch; ++s) {
      const float* x = acts[l].data() + s * in;
      float* z = acts[l + 1].data() + s * out;
      if (m.noise_mode == NoiseMode::kFlipout) {
        kernels::matvec(layer.weight_mean.data.data(), x, layer.bias.data.data(),
                        z, out, in);
        float* u = flip_u[l].data() + s * in;
        kernels::hadamard(noise.layers[l].sign_in.data.data() + s * in, x, u, in);
        kernels::matvec(delta[l].data(), u, nullptr, pert.data(), out, in);
        const float* r = noise.layers[l].sign_out.data.data() + s * out;
        for (std::size_t i = 0; i < out; ++i) z[i] += r[i] * pert[i];
      } else {
        kernels::matvec_sampled(layer.weight_mean.data.data(), sigmas[l].data(),
                                noise.layers[l].sample_eps.data.data() + s * out * in,
                                x, layer.bias.data.data(), z, out, in);
      }
      if (layer.activation == Activation::kRelu) {
        for (std::size_t i = 0; i < out; ++i) z[i] = z[i] > 0.0f ? z[i] : 0.0f;
      }
    }
  }

  // Cross-entropy over the sampled pass.
  const float inv_batch = 1.0f / float(batch);
  double ce_sum = 0.0;
  std::vector<float> g(batch * n_classes);
  for (std::size_t s = 0; s < batch; ++s) {
    ce_sum += softmax_ce_grad(acts[n_layers].data() + s * n_classes, n_classes,
                              labels[s], inv_batch, g.data() + s * n_classes);
  }

  const double kl = kl_to_prior(m);
  const double kl_scale = double(kl_weight) / double(dataset_size);
  const double loss = ce_sum / double(batch) + kl_scale * kl;

  if (!grads) return loss;

  grads->layers.assign(n_layers, {});
  for (std::size_t l = 0; l < n_layers; ++l) {
    grads->layers[l].d_mean = Tensor({m.layers[l].out_dim(), m.layers[l].in_dim()});
    grads->layers[l].d_log_std = Tensor({m.layers[l].out_dim(), m.layers[l].in_dim()});
    grads->layers[l].d_bias = Tensor({m.layers[l].out_dim()});
  }

  // g holds dL/dz for the current layer (batch-major) walking top-down.
  for (std::size_t li = n_layers; li-- > 0;) {
    const auto& layer = m.layers[li];
    const std::size_t out = layer.out_dim(), in = layer.in_dim();
    auto& lg = grads->layers[li];

    std::vector<float> g_prev;
    if (li > 0) g_prev.assign(batch * in, 0.0f);

    std::vector<float> gr(out);           // flipout g .* sign_out
    std::vector<float> d_delta;           // flipout dL/d(delta), batch-summed
    if (m.noise_mode == NoiseMode::kFlipout) d_delta.assign(out * in, 0.0f);
    std::vector<float> dx(in);

    for (std::size_t s = 0; s < batch; ++s) {
      const float* gs = g.data() + s * out;
      const float* x = acts[li].data() + s * in;

      for (std::size_t i = 0; i < out; ++i) lg.d_bias.data[i] += gs[i];
      kernels::outer_accumulate(lg.d_mean.data.data(), gs, x, out, in);

      if (m.noise_mode == NoiseMode::kFlipout) {
        const float* r = noise.layers[li].sign_out.data.data() + s * out;
        kernels::hadamard(gs, r, gr.data(), out);
        const float* u = flip_u[li].data() + s * in;
        kernels::outer_accumulate(d_delta.data(), gr.data(), u, out, in);
        if (li > 0) {
          float* gp = g_prev.data() + s * in;
          kernels::matvec_transposed(layer.weight_mean.data.data(), gs, gp, out, in);
          kernels::matvec_transposed(delta[li].data(), gr.data(), dx.data(), out, in);
          const float* si = noise.layers[li].sign_in.data.data() + s * in;
          for (std::size_t j = 0; j < in; ++j) gp[j] += si[j] * dx[j];
        }
      } else {
        const float* eps = noise.layers[li].sample_eps.data.data() + s * out * in;
        const std::vector<float>& sig = sigmas[li];
        for (std::size_t i = 0; i < out; ++i) {
          const float gi = gs[i];
          const std::size_t off = i * in;
          for (std::size_t j = 0; j < in; ++j) {
            lg.d_log_std.data[off + j] += gi * x[j] * eps[off + j] * sig[off + j];
          }
        }
        if (li > 0) {
          float* gp = g_prev.data() + s * in;
          for (std::size_t i = 0; i < out; ++i) {
            const float gi = gs[i];
            const std::size_t off = i * in;
            for (std::size_t j = 0; j < in; ++j) {
              gp[j] += gi * (layer.weight_mean.data[off + j] +
                             sig[off + j] * eps[off + j]);
            }
          }
        }
      }
    }

    if (m.noise_mode == NoiseMode::kFlipout) {
      // dL/drho = dL/d(delta) .* base .* sigma (zero where sigma is flushed)
      const auto& base = noise.layers[li].base.data;
      const auto& sig = sigmas[li];
      for (std::size_t i = 0; i < out * in; ++i) {
        lg.d_log_std.data[i] += d_delta[i] * base[i] * sig[i];
      }
    }

    if (li > 0) {
      // Through the previous layer's activation: relu derivative is 1 where
      // its output is positive.
      const auto prev_act = m.layers[li - 1].activation;
      if (prev_act == Activation::kRelu) {
        const auto& a = acts[li];
        for (std::size_t i = 0; i < g_prev.size(); ++i) {
          if (a[i] <= 0.0f) g_prev[i] = 0.0f;
        }
      }
      g = std::move(g_prev);
    }
  }

  // KL term.
  for (std::size_t l = 0; l < n_layers; ++l) {
    const auto& layer = m.layers[l];
    auto& lg = grads->layers[l];
    for (std::size_t i = 0; i < layer.weight_mean.numel(); ++i) {
      lg.d_mean.data[i] += float(kl_scale * double(layer.weight_mean.data[i]));
      const double rho = layer.weight_log_std.data[i];
      lg.d_log_std.data[i] += float(kl_scale * (std::exp(2.0 * rho) - 1.0));
    }
  }
  return loss;
}

StochasticModel train(StochasticModel model, const data::Dataset& ds,
                      const TrainConfig& cfg, std::vector<double>* epoch_losses) {
  model.validate();
  if (ds.empty()) throw std::invalid_argument("cannot train on an empty dataset");
  if (cfg.epochs < 1 || cfg.batch_size < 1 || !(cfg.learning_rate > 0.0f)) {
    throw std::invalid_argument("bad train config");
  }
  const std::size_t dim = model.input_dim();
  const std::size_t n_classes = model.num_classes();
  for (const auto& item : ds.items) {
    if (item.image.size() != dim) throw std::invalid_argument("sample size mismatch");
    if (item.label >= n_classes) throw std::invalid_argument("label out of range");
  }

  const std::size_t n = ds.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;

  std::vector<float> batch_x;
  std::vector<int> batch_y;
  Gradients grads;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    RngStream shuffle_rng = RngStream::derive(mix_seed(cfg.seed, 0x5F0FF), epoch);
    for (std::size_t i = n; i > 1; --i) {
      const std::size_t j = std::size_t(shuffle_rng.uniform_int(0, int(i - 1)));
      std::swap(order[i - 1], order[j]);
    }

    double loss_sum = 0.0;
    std::size_t n_batches = 0;
    for (std::size_t start = 0; start < n; start += std::size_t(cfg.batch_size)) {
      const std::size_t b = std::min(std::size_t(cfg.batch_size), n - start);
      batch_x.resize(b * dim);
      batch_y.resize(b);
      for (std::size_t s = 0; s < b; ++s) {
        const auto& item = ds.items[order[start + s]];
        std::copy(item.image.pix.begin(), item.image.pix.end(),
                  batch_x.begin() + s * dim);
        batch_y[s] = item.label;
      }

      RngStream noise_rng =
          RngStream::derive(mix_seed(cfg.seed, 0xBA7C + uint64_t(epoch)), start);
      const NoiseDraw noise = draw_noise(model, b, model.noise_mode, noise_rng);
      loss_sum += batch_loss_and_gradients(model, batch_x.data(), b, dim,
                                           batch_y.data(), noise, cfg.kl_weight,
                                           n, &grads);
      ++n_batches;

      for (std::size_t l = 0; l < model.layers.size(); ++l) {
        auto& layer = model.layers[l];
        const auto& lg = grads.layers[l];
        kernels::axpy(-cfg.learning_rate, lg.d_mean.data.data(),
                      layer.weight_mean.data.data(), layer.weight_mean.numel());
        kernels::axpy(-cfg.learning_rate, lg.d_bias.data.data(),
                      layer.bias.data.data(), layer.bias.numel());
        float* rho = layer.weight_log_std.data.data();
        const float* drho = lg.d_log_std.data.data();
        for (std::size_t i = 0; i < layer.weight_log_std.numel(); ++i) {
          rho[i] = std::clamp(rho[i] - cfg.learning_rate * drho[i],
                              kLogStdFloor, kLogStdCeil);
        }
      }
    }
    if (epoch_losses) epoch_losses->push_back(loss_sum / double(n_batches));
  }
  return model;
}

double deterministic_accuracy(const StochasticModel& m, const data::Dataset& ds) {
  if (ds.empty()) return 0.0;
  std::size_t correct = 0;
  for (const auto& item : ds.items) {
    const Tensor logits = forward_deterministic_logits(m, data::flatten(item.image));
    std::size_t top = 0;
    for (std::size_t c = 1; c < logits.numel(); ++c) {
      if (logits[c] > logits[top]) top = c;
    }
    if (top == item.label) ++correct;
  }
  return double(correct) / double(ds.size());
}

}  // namespace zsel::net
