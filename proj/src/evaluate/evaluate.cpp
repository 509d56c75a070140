#include "zsel/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace zsel::eval {

const char* method_name(Method m) {
  return m == Method::kZtest ? "ztest" : "sr";
}

std::vector<EvalSample> label_samples(const std::vector<sel::Decision>& decisions,
                                      const std::vector<GroundTruth>& truth) {
  if (decisions.size() != truth.size()) {
    throw std::invalid_argument("decisions and ground truth differ in length");
  }
  std::vector<EvalSample> out;
  out.reserve(decisions.size());
  for (std::size_t i = 0; i < decisions.size(); ++i) {
    EvalSample s;
    s.confidence = decisions[i].confidence;
    s.predicted = decisions[i].predicted;
    s.truth = truth[i];
    out.push_back(s);
  }
  return out;
}

namespace {

bool counts_positive(const EvalSample& s, MisclassifiedRole role) {
  if (!s.truth.in_distribution) return false;
  if (role == MisclassifiedRole::kNegative) return s.predicted == s.truth.label;
  return true;
}

bool counts_negative(const EvalSample& s, MisclassifiedRole role) {
  if (!s.truth.in_distribution) return true;
  return role == MisclassifiedRole::kNegative && s.predicted != s.truth.label;
}

}  // namespace

RocCurve sweep_roc(const std::vector<EvalSample>& samples, Method method,
                   MisclassifiedRole role) {
  if (samples.empty()) throw std::invalid_argument("no samples to sweep");

  double total_pos = 0, total_neg = 0;
  for (const auto& s : samples) {
    if (counts_positive(s, role)) total_pos += 1;
    if (counts_negative(s, role)) total_neg += 1;
  }

  // Candidate thresholds: domain endpoints plus every distinct confidence,
  // descending. Acceptance at t is confidence >= t.
  std::vector<double> thresholds;
  thresholds.reserve(samples.size() + 2);
  const double top = method == Method::kSr
                         ? 1.0
                         : std::numeric_limits<double>::infinity();
  thresholds.push_back(top);
  for (const auto& s : samples) thresholds.push_back(s.confidence);
  thresholds.push_back(0.0);
  std::sort(thresholds.begin(), thresholds.end(), std::greater<double>());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()),
                   thresholds.end());

  // Sort samples by confidence descending and accumulate counts as the
  // threshold drops past them.
  std::vector<const EvalSample*> order;
  order.reserve(samples.size());
  for (const auto& s : samples) order.push_back(&s);
  std::sort(order.begin(), order.end(),
            [](const EvalSample* a, const EvalSample* b) {
              return a->confidence > b->confidence;
            });

  RocCurve curve;
  curve.method = method;
  curve.points.reserve(thresholds.size());

  std::size_t next = 0;
  double tp = 0, fp = 0;
  for (double t : thresholds) {
    while (next < order.size() && order[next]->confidence >= t) {
      const EvalSample& s = *order[next];
      if (counts_negative(s, role)) {
        fp += 1;
      } else if (counts_positive(s, role) && s.predicted == s.truth.label) {
        tp += 1;
      }
      ++next;
    }
    RocPoint p;
    p.threshold = t;
    p.fpr = total_neg > 0 ? fp / total_neg : 0.0;
    p.tpr = total_pos > 0 ? tp / total_pos : 0.0;
    curve.points.push_back(p);
  }
  return curve;
}

// Thresholds of 1 or above never produce a valid sr output.
static constexpr double kSrValidCap = 1.0 - 1e-9;

double auroc_valid(const RocCurve& curve) {
  if (curve.points.empty()) throw std::invalid_argument("empty roc curve");

  std::vector<const RocPoint*> valid;
  valid.reserve(curve.points.size());
  for (const auto& p : curve.points) {
    if (curve.method == Method::kSr && p.threshold >= kSrValidCap) continue;
    valid.push_back(&p);
  }
  if (valid.size() < 2) return 0.0;

  // Points arrive ordered by decreasing threshold, i.e. increasing fpr.
  double area = 0.0;
  for (std::size_t i = 1; i < valid.size(); ++i) {
    const double w = valid[i]->fpr - valid[i - 1]->fpr;
    area += w * 0.5 * (valid[i]->tpr + valid[i - 1]->tpr);
  }
  return area;
}

namespace {

void print_value(std::ostream& out, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  out << buf;
}

}  // namespace

void write_summary_csv(std::ostream& out, const std::vector<ReportRow>& rows) {
  out << "method,distortion,auroc_valid\n";
  for (const auto& r : rows) {
    out << method_name(r.method) << ',' << r.distortion << ',';
    print_value(out, r.auroc);
    out << '\n';
  }
}

void write_curves_csv(std::ostream& out, const std::vector<ReportRow>& rows) {
  out << "method,distortion,threshold,fpr,tpr\n";
  for (const auto& r : rows) {
    for (const auto& p : r.curve.points) {
      out << method_name(r.method) << ',' << r.distortion << ',';
      print_value(out, p.threshold);
      out << ',';
      print_value(out, p.fpr);
      out << ',';
      print_value(out, p.tpr);
      out << '\n';
    }
  }
}

void print_comparison(std::ostream& out, const std::vector<ReportRow>& rows) {
  // Pair up ztest / sr rows by distortion, preserving first-seen order.
  std::vector<std::string> names;
  for (const auto& r : rows) {
    if (std::find(names.begin(), names.end(), r.distortion) == names.end()) {
      names.push_back(r.distortion);
    }
  }
  out << "distortion        ztest     sr\n";
  for (const auto& name : names) {
    const ReportRow* z = nullptr;
    const ReportRow* s = nullptr;
    for (const auto& r : rows) {
      if (r.distortion != name) continue;
      (r.method == Method::kZtest ? z : s) = &r;
    }
    char line[128];
    if (z && s) {
      std::snprintf(line, sizeof line, "%-16s  %.4f    %.4f%s\n", name.c_str(),
                    z->auroc, s->auroc, z->auroc >= s->auroc ? "" : "  (sr ahead)");
    } else if (z) {
      std::snprintf(line, sizeof line, "%-16s  %.4f    -\n", name.c_str(), z->auroc);
    } else if (s) {
      std::snprintf(line, sizeof line, "%-16s  -         %.4f\n", name.c_str(), s->auroc);
    } else {
      continue;
    }
    out << line;
  }
}

}  // namespace zsel::eval
