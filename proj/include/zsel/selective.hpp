#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "zsel/tensor.hpp"

// Accept/reject decisions over repeated stochastic class scores: per-class
// mean/std over n passes, two-sample Z-tests of the top class against every
// other class, and the max-softmax baseline.
namespace zsel::sel {

// n passes x N classes of class scores for one input.
struct ScoreMatrix {
  int passes = 0;   // n
  int classes = 0;  // N
  std::vector<float> values;  // row-major, passes x classes

  float at(int pass, int cls) const {
    return values[std::size_t(pass) * classes + cls];
  }
  float& at(int pass, int cls) {
    return values[std::size_t(pass) * classes + cls];
  }
  void validate() const;
};

// CSV interchange: first line "n,N", then n lines of N comma-separated floats.
ScoreMatrix read_score_csv(std::istream& in);
ScoreMatrix read_score_csv_file(const std::string& path);
void write_score_csv(std::ostream& out, const ScoreMatrix& m);
void write_score_csv_file(const std::string& path, const ScoreMatrix& m);

// Per-class mean and sample standard deviation (n-1 denominator) over passes.
struct ClassStats {
  std::vector<double> mean;
  std::vector<double> std_dev;
  int passes = 0;
};

ClassStats class_stats(const ScoreMatrix& m);  // throws if m.passes < 2

// Z = (mu1 - mu2 - delta) / sqrt(sigma1^2/n1 + sigma2^2/n2).
// Degenerate case sigma1 == sigma2 == 0: +inf / -inf by the sign of the
// numerator, 0 on an exact tie.
double z_statistic(double mu1, double sigma1, double mu2, double sigma2,
                   int n1, int n2, double delta);

struct DecisionConfig {
  double z_threshold = 0.0;  // accept iff min Z >= z_threshold
  double delta = 0.0;        // hypothesized mean difference, 0 tests equality
};

struct Decision {
  bool accepted = false;
  int predicted = -1;   // argmax class, ties broken toward the lowest index
  double confidence = 0.0;  // min Z over competitors, or max softmax for SR
};

// Algorithm: take the class with the highest mean, Z-test it against every
// other class, accept iff the smallest Z clears the threshold.
Decision decide(const ClassStats& stats, const DecisionConfig& cfg);

// Max-softmax baseline: accept the argmax iff max(probs) >= threshold.
// threshold must lie in [0,1].
Decision sr_decide(const Tensor& probs, double threshold);

// Standard normal CDF, |error| < 1e-7.
double normal_cdf(double x);

}  // namespace zsel::sel
