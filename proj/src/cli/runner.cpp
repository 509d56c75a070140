#include "zsel/runner.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include "zsel/datasets.hpp"

namespace zsel::cli {

namespace {

constexpr uint64_t kSeedData = 1;
constexpr uint64_t kSeedSplit = 2;
constexpr uint64_t kSeedInit = 3;
constexpr uint64_t kSeedTrain = 4;
constexpr uint64_t kSeedDistort = 5;
constexpr uint64_t kSeedPasses = 6;
constexpr uint64_t kSeedSrPass = 7;

uint64_t task_seed(uint64_t seed, uint64_t purpose, uint64_t cfg, uint64_t idx) {
  return mix_seed(mix_seed(mix_seed(seed, purpose), cfg), idx);
}

int resolve_threads(int requested) {
  if (requested > 0) return std::min(requested, 64);
  const unsigned hw = std::thread::hardware_concurrency();
  return int(std::clamp(hw, 1u, 8u));
}

// Runs fn(i) for i in [0, total) on `threads` workers with static index
// chunks. Results must be written to per-index slots so the outcome cannot
// depend on scheduling.
template <typename Fn>
void parallel_for(std::size_t total, int threads, Fn&& fn) {
  if (total == 0) return;
  const int t = std::max(1, std::min<int>(threads, int(total)));
  if (t == 1) {
    for (std::size_t i = 0; i < total; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::mutex err_mutex;
  std::exception_ptr first_error;
  const std::size_t chunk = (total + t - 1) / t;
  for (int w = 0; w < t; ++w) {
    const std::size_t begin = std::size_t(w) * chunk;
    const std::size_t end = std::min(total, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&, begin, end] {
      try {
        for (std::size_t i = begin; i < end; ++i) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  f << text;
}

}  // namespace

std::vector<int> parse_class_list(const std::string& text) {
  std::vector<int> out;
  if (text.empty()) return out;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      std::size_t used = 0;
      const int v = std::stoi(item, &used);
      if (used != item.size() || v < 0) throw std::invalid_argument(item);
      out.push_back(v);
    } catch (const std::exception&) {
      throw UsageError("bad class id in list: '" + item + "'");
    }
  }
  return out;
}

data::Dataset load_dataset_any(const std::string& path) {
  std::ifstream probe(path, std::ios::binary);
  if (!probe) throw std::runtime_error("cannot open " + path);
  char magic[7] = {};
  probe.read(magic, sizeof magic);
  probe.close();
  if (std::string_view(magic, 7) == "ZSELDS1") return data::read_container(path);
  return data::read_cifar10(path);
}

std::vector<std::pair<std::string, distort::DistortionSpec>>
resolve_distortions(const std::vector<std::string>& specs) {
  std::vector<std::pair<std::string, distort::DistortionSpec>> out;
  for (const auto& text : specs) {
    if (text == "none") {
      out.emplace_back("none", distort::DistortionSpec{});
    } else if (text == "all") {
      out.emplace_back("none", distort::DistortionSpec{});
      for (auto& entry : distort::default_suite()) out.push_back(std::move(entry));
    } else {
      try {
        out.emplace_back(text, distort::parse_spec(text));
      } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
      }
    }
  }
  if (out.empty()) out.emplace_back("none", distort::DistortionSpec{});
  return out;
}

TrainSummary run_train(const TrainOptions& opt) {
  data::Dataset ds;
  if (opt.use_synthetic) {
    const auto& s = opt.synthetic;
    ds = data::gen_blobs(s.classes, s.dims, s.per_class, s.separation,
                         s.noise_sigma, mix_seed(opt.seed, kSeedData));
  } else {
    if (opt.dataset_paths.empty()) throw UsageError("no dataset given");
    for (const auto& path : opt.dataset_paths) {
      data::Dataset part = load_dataset_any(path);
      if (ds.items.empty()) {
        ds = std::move(part);
      } else {
        ds.num_classes = std::max(ds.num_classes, part.num_classes);
        for (auto& item : part.items) ds.items.push_back(std::move(item));
      }
    }
  }
  if (ds.empty()) throw std::runtime_error("dataset is empty");

  data::SplitSpec split_spec;
  split_spec.excluded_classes = opt.exclude;
  split_spec.train_fraction = opt.train_fraction;
  split_spec.seed = mix_seed(opt.seed, kSeedSplit);
  data::Split parts = data::split(ds, split_spec);
  if (parts.train.empty()) throw std::runtime_error("train split is empty");

  const std::size_t dim = parts.train.items[0].image.size();
  net::StochasticModel model =
      net::make_mlp(dim, opt.hidden, std::size_t(parts.train.num_classes),
                    opt.noise_mode, mix_seed(opt.seed, kSeedInit));

  net::TrainConfig cfg = opt.train;
  cfg.seed = mix_seed(opt.seed, kSeedTrain);
  std::vector<double> losses;
  model = net::train(std::move(model), parts.train, cfg, &losses);

  if (opt.out_model.empty()) throw UsageError("no output checkpoint path");
  net::save_model(opt.out_model, model);

  if (!opt.save_split_dir.empty()) {
    std::filesystem::create_directories(opt.save_split_dir);
    const std::filesystem::path dir(opt.save_split_dir);
    data::write_container((dir / "train.zsd").string(), parts.train);
    data::write_container((dir / "test_in.zsd").string(), parts.test_in);
    data::write_container((dir / "test_out.zsd").string(), parts.test_out);
    std::ostringstream meta;
    meta << "seed=" << opt.seed << "\n";
    meta << "kept_classes=";
    for (std::size_t i = 0; i < parts.kept_classes.size(); ++i) {
      meta << (i ? "," : "") << parts.kept_classes[i];
    }
    meta << "\nexcluded=";
    for (std::size_t i = 0; i < opt.exclude.size(); ++i) {
      meta << (i ? "," : "") << opt.exclude[i];
    }
    meta << "\ntrain=" << parts.train.size() << " test_in=" << parts.test_in.size()
         << " test_out=" << parts.test_out.size() << "\n";
    write_text_file((dir / "split.meta").string(), meta.str());
  }

  TrainSummary summary;
  summary.final_loss = losses.empty() ? 0.0 : losses.back();
  summary.train_accuracy = net::deterministic_accuracy(model, parts.train);
  summary.train_size = parts.train.size();
  summary.test_in_size = parts.test_in.size();
  summary.test_out_size = parts.test_out.size();
  if (!opt.quiet) {
    std::printf("trained %zu samples (%zu test-in, %zu test-out held out)\n",
                summary.train_size, summary.test_in_size, summary.test_out_size);
    std::printf("final loss %.6f, deterministic train accuracy %.4f\n",
                summary.final_loss, summary.train_accuracy);
    std::printf("checkpoint: %s\n", opt.out_model.c_str());
  }
  return summary;
}

EvalSummary run_eval(const EvalOptions& opt) {
  if (opt.n_passes < 2) {
    throw UsageError("need at least two passes for a standard deviation");
  }
  const bool want_ztest = opt.method == "ztest" || opt.method == "both";
  const bool want_sr = opt.method == "sr" || opt.method == "both";
  if (!want_ztest && !want_sr) {
    throw UsageError("method must be ztest, sr or both");
  }
  if (opt.model_path.empty() || opt.test_in_path.empty() || opt.test_out_path.empty()) {
    throw UsageError("eval needs --model, --test-in and --test-out");
  }
  if (opt.has_fixed_z && !(opt.z_threshold >= 0.0)) {
    throw UsageError("z threshold must be >= 0");
  }

  const net::StochasticModel model = net::load_model(opt.model_path);
  const data::Dataset test_in = data::read_container(opt.test_in_path);
  const data::Dataset test_out = data::read_container(opt.test_out_path);
  if (test_in.empty() || test_out.empty()) {
    throw std::runtime_error("both test sets must be non-empty");
  }

  const auto configs = resolve_distortions(opt.distortions);
  const std::size_t n_in = test_in.size();
  const std::size_t total = n_in + test_out.size();
  const int threads = resolve_threads(opt.threads);

  std::vector<eval::GroundTruth> truth(total);
  for (std::size_t i = 0; i < total; ++i) {
    if (i < n_in) {
      truth[i] = {true, int(test_in.items[i].label)};
    } else {
      truth[i] = {false, -1};
    }
  }

  const sel::DecisionConfig decision_cfg{opt.has_fixed_z ? opt.z_threshold : 0.0, 0.0};

  EvalSummary result;
  std::vector<std::vector<sel::Decision>> fixed_z_decisions;

  for (std::size_t ci = 0; ci < configs.size(); ++ci) {
    const auto& [name, spec] = configs[ci];
    std::vector<sel::Decision> z_dec(want_ztest ? total : 0);
    std::vector<sel::Decision> sr_dec(want_sr ? total : 0);

    parallel_for(total, threads, [&](std::size_t i) {
      const data::LabeledImage& item =
          i < n_in ? test_in.items[i] : test_out.items[i - n_in];
      Image img = item.image;
      if (name != "none") {
        img = distort::apply(spec, img, task_seed(opt.seed, kSeedDistort, ci, i));
      }
      const Tensor x = data::flatten(img);
      if (want_ztest) {
        const sel::ScoreMatrix m =
            net::sample_runs(model, x, opt.n_passes,
                             task_seed(opt.seed, kSeedPasses, ci, i),
                             opt.score_space_softmax);
        z_dec[i] = sel::decide(sel::class_stats(m), decision_cfg);
      }
      if (want_sr) {
        Tensor probs;
        if (opt.sr_single_pass) {
          RngStream rng(task_seed(opt.seed, kSeedSrPass, ci, i));
          probs = net::forward_sample(model, x, rng);
        } else {
          probs = net::forward_deterministic(model, x);
        }
        sr_dec[i] = sel::sr_decide(probs, 0.0);
      }
    });

    if (want_ztest) {
      const auto samples = eval::label_samples(z_dec, truth);
      eval::ReportRow row;
      row.method = eval::Method::kZtest;
      row.distortion = name;
      row.curve = eval::sweep_roc(samples, eval::Method::kZtest, opt.role);
      row.auroc = eval::auroc_valid(row.curve);
      result.rows.push_back(std::move(row));
      if (opt.has_fixed_z) fixed_z_decisions.push_back(z_dec);
    }
    if (want_sr) {
      const auto samples = eval::label_samples(sr_dec, truth);
      eval::ReportRow row;
      row.method = eval::Method::kSr;
      row.distortion = name;
      row.curve = eval::sweep_roc(samples, eval::Method::kSr, opt.role);
      row.auroc = eval::auroc_valid(row.curve);
      result.rows.push_back(std::move(row));
    }
  }

  std::filesystem::create_directories(opt.out_dir.empty() ? "." : opt.out_dir);
  const std::filesystem::path dir(opt.out_dir.empty() ? "." : opt.out_dir);
  result.summary_path = (dir / "summary.csv").string();
  result.curves_path = (dir / "curves.csv").string();
  {
    std::ofstream f(result.summary_path);
    if (!f) throw std::runtime_error("cannot open " + result.summary_path);
    eval::write_summary_csv(f, result.rows);
  }
  {
    std::ofstream f(result.curves_path);
    if (!f) throw std::runtime_error("cannot open " + result.curves_path);
    eval::write_curves_csv(f, result.rows);
  }

  if (opt.has_fixed_z && want_ztest) {
    result.decisions_path = (dir / "decisions.csv").string();
    std::ofstream f(result.decisions_path);
    if (!f) throw std::runtime_error("cannot open " + result.decisions_path);
    f << "distortion,sample,set,label,predicted,confidence,accepted\n";
    char buf[64];
    std::size_t z_row = 0;
    for (std::size_t ci = 0; ci < configs.size(); ++ci, ++z_row) {
      const auto& dec = fixed_z_decisions[z_row];
      for (std::size_t i = 0; i < dec.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.10g", dec[i].confidence);
        f << configs[ci].first << ',' << i << ','
          << (truth[i].in_distribution ? "in" : "out") << ','
          << (truth[i].in_distribution ? truth[i].label : -1) << ','
          << dec[i].predicted << ',' << buf << ',' << (dec[i].accepted ? 1 : 0)
          << '\n';
      }
    }
  }

  if (!opt.quiet) {
    eval::print_comparison(std::cout, result.rows);
    if (opt.has_fixed_z) {
      std::printf("fixed z threshold %.6g (two-sided significance %.6g)\n",
                  opt.z_threshold, 2.0 * (1.0 - sel::normal_cdf(opt.z_threshold)));
    }
  }
  return result;
}

void run_distort(const DistortOptions& opt) {
  distort::DistortionSpec spec;
  try {
    spec = distort::parse_spec(opt.spec_text);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  data::Dataset ds = load_dataset_any(opt.in_path);
  for (std::size_t i = 0; i < ds.items.size(); ++i) {
    ds.items[i].image =
        distort::apply(spec, ds.items[i].image, mix_seed(opt.seed, i));
  }
  data::write_container(opt.out_path, ds);

  std::ostringstream meta;
  meta << "seed=" << opt.seed << "\n";
  meta << "spec=" << opt.spec_text << "\n";
  meta << "source=" << opt.in_path << "\n";
  write_text_file(opt.out_path + ".meta", meta.str());
}

}  // namespace zsel::cli
