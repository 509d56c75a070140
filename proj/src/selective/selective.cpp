#include "zsel/selective.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace zsel::sel {

void ScoreMatrix::validate() const {
  if (passes < 2) {
    throw std::invalid_argument("need at least two passes for a standard deviation");
  }
  if (classes < 2) throw std::invalid_argument("need at least two classes");
  if (values.size() != std::size_t(passes) * classes) {
    throw std::invalid_argument("score matrix size mismatch");
  }
  for (float v : values) {
    if (!std::isfinite(v)) throw std::invalid_argument("non-finite score");
  }
}

ScoreMatrix read_score_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty score csv");
  ScoreMatrix m;
  {
    std::istringstream header(line);
    char comma = 0;
    if (!(header >> m.passes >> comma >> m.classes) || comma != ',') {
      throw std::runtime_error("bad score csv header, expected \"n,N\"");
    }
  }
  if (m.passes < 2 || m.classes < 2) throw std::runtime_error("bad score csv dimensions");
  m.values.reserve(std::size_t(m.passes) * m.classes);
  for (int r = 0; r < m.passes; ++r) {
    if (!std::getline(in, line)) throw std::runtime_error("score csv truncated");
    std::istringstream row(line);
    std::string cell;
    for (int c = 0; c < m.classes; ++c) {
      if (!std::getline(row, cell, ',')) throw std::runtime_error("score csv row too short");
      m.values.push_back(std::stof(cell));
    }
  }
  m.validate();
  return m;
}

ScoreMatrix read_score_csv_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  return read_score_csv(f);
}

void write_score_csv(std::ostream& out, const ScoreMatrix& m) {
  out << m.passes << ',' << m.classes << '\n';
  char buf[64];
  for (int r = 0; r < m.passes; ++r) {
    for (int c = 0; c < m.classes; ++c) {
      std::snprintf(buf, sizeof buf, "%.9g", double(m.at(r, c)));
      out << (c ? "," : "") << buf;
    }
    out << '\n';
  }
}

void write_score_csv_file(const std::string& path, const ScoreMatrix& m) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  write_score_csv(f, m);
}

ClassStats class_stats(const ScoreMatrix& m) {
  m.validate();
  ClassStats s;
  s.passes = m.passes;
  s.mean.resize(m.classes);
  s.std_dev.resize(m.classes);
  for (int c = 0; c < m.classes; ++c) {
    double sum = 0.0;
    for (int r = 0; r < m.passes; ++r) sum += m.at(r, c);
    const double mu = sum / m.passes;
    double sq = 0.0;
    for (int r = 0; r < m.passes; ++r) {
      const double d = m.at(r, c) - mu;
      sq += d * d;
    }
    s.mean[c] = mu;
    s.std_dev[c] = std::sqrt(sq / (m.passes - 1));
  }
  return s;
}

double z_statistic(double mu1, double sigma1, double mu2, double sigma2,
                   int n1, int n2, double delta) {
  if (n1 < 2 || n2 < 2) {
    throw std::invalid_argument("need at least two passes for a standard deviation");
  }
  if (sigma1 < 0.0 || sigma2 < 0.0) {
    throw std::invalid_argument("standard deviations must be non-negative");
  }
  const double num = mu1 - mu2 - delta;
  const double denom = std::sqrt(sigma1 * sigma1 / n1 + sigma2 * sigma2 / n2);
  if (denom == 0.0) {
    // Both samples are exactly constant: a certain difference always wins,
    // a certain tie never does.
    if (num > 0.0) return std::numeric_limits<double>::infinity();
    if (num < 0.0) return -std::numeric_limits<double>::infinity();
    return 0.0;
  }
  return num / denom;
}

Decision decide(const ClassStats& stats, const DecisionConfig& cfg) {
  const int n_classes = int(stats.mean.size());
  if (n_classes < 2) throw std::invalid_argument("need at least two classes");
  if (!std::isfinite(cfg.z_threshold)) {
    throw std::invalid_argument("z threshold must be finite");
  }

  int top = 0;
  for (int c = 1; c < n_classes; ++c) {
    if (stats.mean[c] > stats.mean[top]) top = c;  // ties keep the lowest index
  }

  double min_z = std::numeric_limits<double>::infinity();
  for (int c = 0; c < n_classes; ++c) {
    if (c == top) continue;
    const double z = z_statistic(stats.mean[top], stats.std_dev[top],
                                 stats.mean[c], stats.std_dev[c],
                                 stats.passes, stats.passes, cfg.delta);
    if (z < min_z) min_z = z;
  }

  Decision d;
  d.predicted = top;
  d.confidence = min_z;
  d.accepted = min_z >= cfg.z_threshold;
  return d;
}

Decision sr_decide(const Tensor& probs, double threshold) {
  if (!(threshold >= 0.0 && threshold <= 1.0)) {
    throw std::invalid_argument("sr threshold must lie in [0,1]");
  }
  if (probs.numel() < 2) throw std::invalid_argument("need at least two classes");
  int top = 0;
  for (std::size_t c = 1; c < probs.numel(); ++c) {
    if (probs[c] > probs[top]) top = int(c);
  }
  Decision d;
  d.predicted = top;
  d.confidence = probs[top];
  d.accepted = d.confidence >= threshold;
  return d;
}

double normal_cdf(double x) {
  return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

}  // namespace zsel::sel
