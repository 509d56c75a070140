#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "zsel/distort.hpp"
#include "zsel/evaluate.hpp"
#include "zsel/kernels.hpp"
#include "zsel/net.hpp"

// Experiment driver behind the CLI subcommands. Everything here is a pure
// function of its options struct: identical options (including seed) give
// byte-identical output files regardless of worker-thread count.
namespace zsel::cli {

// Bad arguments / malformed inputs; the CLI maps this to exit code 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SyntheticSpec {
  int classes = 4;
  int dims = 16;
  int per_class = 500;
  float separation = 0.6f;
  float noise_sigma = 0.1f;
};

struct TrainOptions {
  bool use_synthetic = true;
  SyntheticSpec synthetic;
  std::vector<std::string> dataset_paths;  // container or CIFAR-10 binary
  std::vector<int> exclude;
  float train_fraction = 2.0f / 3.0f;
  std::vector<std::size_t> hidden = {32, 32};
  net::NoiseMode noise_mode = net::NoiseMode::kFlipout;
  net::TrainConfig train;   // train.seed is derived from `seed`
  uint64_t seed = 0;
  std::string out_model;
  std::string save_split_dir;  // when set, writes train/test_in/test_out.zsd
  bool quiet = false;
};

struct TrainSummary {
  double final_loss = 0.0;
  double train_accuracy = 0.0;  // deterministic path
  std::size_t train_size = 0, test_in_size = 0, test_out_size = 0;
};

TrainSummary run_train(const TrainOptions& opt);

struct EvalOptions {
  std::string model_path;
  std::string test_in_path;
  std::string test_out_path;
  int n_passes = 30;
  std::string method = "both";  // ztest | sr | both
  bool has_fixed_z = false;
  double z_threshold = 0.0;
  bool score_space_softmax = true;
  bool sr_single_pass = false;  // default: deterministic path scores
  // "none", "all", or explicit spec strings; empty means just the clean test.
  std::vector<std::string> distortions = {"none"};
  eval::MisclassifiedRole role = eval::MisclassifiedRole::kNeither;
  int threads = 0;  // 0 = one per hardware thread (capped)
  uint64_t seed = 0;
  std::string out_dir;
  bool quiet = false;
};

struct EvalSummary {
  std::vector<eval::ReportRow> rows;
  std::string summary_path, curves_path, decisions_path;
};

EvalSummary run_eval(const EvalOptions& opt);

struct DistortOptions {
  std::string in_path;
  std::string out_path;
  std::string spec_text;  // "kind=...,param=value,..."
  uint64_t seed = 0;
};

void run_distort(const DistortOptions& opt);

// Shared helpers.
data::Dataset load_dataset_any(const std::string& path);  // sniffs format
std::vector<int> parse_class_list(const std::string& text);
std::vector<std::pair<std::string, distort::DistortionSpec>>
resolve_distortions(const std::vector<std::string>& specs);

}  // namespace zsel::cli
