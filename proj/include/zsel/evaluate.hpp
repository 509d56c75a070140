#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "zsel/selective.hpp"

// Threshold sweeps, ROC construction and valid-region AUROC.
//
// Convention (fixed project-wide): a *negative* is an out-of-distribution
// sample and FPR is the fraction of negatives accepted; a *positive* is an
// in-distribution sample and TPR is the fraction of positives accepted with
// the correct predicted class. Threshold 0 accepts everything, so it yields
// 100% FPR.
namespace zsel::eval {

enum class Method { kZtest, kSr };
const char* method_name(Method m);

struct GroundTruth {
  bool in_distribution = false;
  int label = -1;  // meaningful only when in_distribution
};

struct EvalSample {
  double confidence = 0.0;
  int predicted = -1;
  GroundTruth truth;
};

// How an accepted in-distribution sample with a wrong prediction counts.
// kNeither (default): not a TP, not an FP; it only depresses TPR.
// kNegative: it is moved to the negative population (numerator and
// denominator), so accepting it raises FPR.
enum class MisclassifiedRole { kNeither, kNegative };

// Pairs decisions with ground truth; throws on length mismatch.
std::vector<EvalSample> label_samples(const std::vector<sel::Decision>& decisions,
                                      const std::vector<GroundTruth>& truth);

struct RocPoint {
  double threshold = 0.0;  // +inf marks the reject-all end of a ztest curve
  double fpr = 0.0;
  double tpr = 0.0;
};

// Points ordered by decreasing threshold; fpr and tpr are non-decreasing
// along the list because acceptance (confidence >= t) is monotone in t.
struct RocCurve {
  Method method = Method::kZtest;
  std::vector<RocPoint> points;
};

// Thresholds are the distinct sample confidences plus the domain endpoints
// (0 and 1 for sr, 0 and +inf for ztest); at each one acceptance is
// confidence >= t. Throws on an empty sample list.
RocCurve sweep_roc(const std::vector<EvalSample>& samples, Method method,
                   MisclassifiedRole role = MisclassifiedRole::kNeither);

// Trapezoidal area under the points reachable by a valid threshold: for sr
// only thresholds < 1 count (a threshold of 1 rejects every output), for
// ztest every point counts including the reject-all limit. The sr curve is
// never extrapolated below its lowest valid point.
double auroc_valid(const RocCurve& curve);

struct ReportRow {
  Method method = Method::kZtest;
  std::string distortion;  // "none" for the clean test
  RocCurve curve;
  double auroc = 0.0;
};

// Summary CSV: header "method,distortion,auroc_valid".
void write_summary_csv(std::ostream& out, const std::vector<ReportRow>& rows);
// Curve CSV: header "method,distortion,threshold,fpr,tpr".
void write_curves_csv(std::ostream& out, const std::vector<ReportRow>& rows);
// Side-by-side ztest vs sr table on stdout-style streams.
void print_comparison(std::ostream& out, const std::vector<ReportRow>& rows);

}  // namespace zsel::eval
