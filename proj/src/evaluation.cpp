// Copyright 2026 The BlackSpectrum Authors
// SPDX-License-Identifier: Apache-2.0

#include "blackspectrum/evaluation.hpp"

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "blackspectrum/errors.hpp"
#include "blackspectrum/io.hpp"

namespace blackspectrum {

namespace {

void require_both_labels(const LabeledScores& scores) {
  bool has_member = false;
  bool has_non = false;
  for (const LabeledEntry& e : scores) {
    (e.label == Label::member ? has_member : has_non) = true;
  }
  if (!has_member || !has_non) {
    throw DegenerateLabels("metrics need at least one member and one non-member");
  }
}

std::vector<double> distinct_scores_desc(const LabeledScores& scores) {
  std::vector<double> values;
  values.reserve(scores.size());
  for (const LabeledEntry& e : scores) values.push_back(e.score);
  std::sort(values.begin(), values.end(), std::greater<>());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  return values;
}

// Serializes like JSON (shortest round-trip form) so CSV output is
// deterministic; JSON itself cannot carry infinities.
std::string format_double(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return nlohmann::json(x).dump();
}

}  // namespace

std::vector<RocPoint> roc_points(const LabeledScores& scores) {
  require_both_labels(scores);

  double n_member = 0.0;
  double n_non = 0.0;
  for (const LabeledEntry& e : scores) {
    (e.label == Label::member ? n_member : n_non) += 1.0;
  }

  std::vector<RocPoint> points;
  points.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0});
  for (double threshold : distinct_scores_desc(scores)) {
    double tp = 0.0;
    double fp = 0.0;
    for (const LabeledEntry& e : scores) {
      if (e.score >= threshold) {
        (e.label == Label::member ? tp : fp) += 1.0;
      }
    }
    points.push_back({threshold, fp / n_non, tp / n_member});
  }
  return points;
}

double auc(const LabeledScores& scores) {
  require_both_labels(scores);

  std::vector<std::pair<double, Label>> sorted;
  sorted.reserve(scores.size());
  for (const LabeledEntry& e : scores) sorted.emplace_back(e.score, e.label);
  std::sort(sorted.begin(), sorted.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });

  // Average ranks over tie groups make tied pairs count exactly one half.
  double rank_sum_member = 0.0;
  double n_member = 0.0;
  size_t i = 0;
  while (i < sorted.size()) {
    size_t j = i;
    while (j < sorted.size() && sorted[j].first == sorted[i].first) ++j;
    double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (size_t k = i; k < j; ++k) {
      if (sorted[k].second == Label::member) {
        rank_sum_member += avg_rank;
        n_member += 1.0;
      }
    }
    i = j;
  }
  double n_non = static_cast<double>(sorted.size()) - n_member;
  double u = rank_sum_member - n_member * (n_member + 1.0) / 2.0;
  return u / (n_member * n_non);
}

double auc_trapezoid(const std::vector<RocPoint>& points) {
  double area = 0.0;
  for (size_t i = 1; i < points.size(); ++i) {
    area += (points[i].fpr - points[i - 1].fpr) * (points[i].tpr + points[i - 1].tpr) / 2.0;
  }
  return area;
}

BalancedAccuracyResult balanced_accuracy(const LabeledScores& scores) {
  require_both_labels(scores);

  std::vector<double> distinct = distinct_scores_desc(scores);
  std::sort(distinct.begin(), distinct.end());

  std::vector<double> candidates;
  candidates.reserve(distinct.size() * 2 + 1);
  for (size_t i = 0; i < distinct.size(); ++i) {
    candidates.push_back(distinct[i]);
    if (i + 1 < distinct.size()) {
      candidates.push_back((distinct[i] + distinct[i + 1]) / 2.0);
    }
  }
  candidates.push_back(distinct.back() + 1.0);  // classify everything non-member
  std::sort(candidates.begin(), candidates.end());

  double n_member = 0.0;
  double n_non = 0.0;
  for (const LabeledEntry& e : scores) {
    (e.label == Label::member ? n_member : n_non) += 1.0;
  }

  BalancedAccuracyResult best{-1.0, 0.0};
  for (double threshold : candidates) {
    double tp = 0.0;
    double tn = 0.0;
    for (const LabeledEntry& e : scores) {
      if (e.label == Label::member && e.score >= threshold) tp += 1.0;
      if (e.label == Label::non_member && e.score < threshold) tn += 1.0;
    }
    double acc = (tp / n_member + tn / n_non) / 2.0;
    if (acc > best.acc) best = {acc, threshold};
  }
  return best;
}

double tpr_at_fpr(const LabeledScores& scores, double fpr_budget) {
  if (fpr_budget < 0.0 || fpr_budget > 1.0) {
    throw std::invalid_argument("fpr budget must lie in [0, 1]");
  }
  double best = 0.0;
  for (const RocPoint& p : roc_points(scores)) {
    if (p.fpr <= fpr_budget) best = std::max(best, p.tpr);
  }
  return best;
}

namespace {

struct Moments {
  double n = 0.0;
  double mean = 0.0;
  double var = 0.0;  // unbiased
};

Moments moments(const std::vector<double>& xs) {
  Moments m;
  m.n = static_cast<double>(xs.size());
  m.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / m.n;
  double ss = 0.0;
  for (double x : xs) ss += (x - m.mean) * (x - m.mean);
  m.var = ss / (m.n - 1.0);
  return m;
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;

  // Lentz's continued fraction; converges quickly when x is on the small
  // side of the split point.
  auto continued_fraction = [](double aa, double bb, double xx) {
    const double eps = 1e-15;
    const double fpmin = 1e-300;
    double qab = aa + bb;
    double qap = aa + 1.0;
    double qam = aa - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * xx / qap;
    if (std::abs(d) < fpmin) d = fpmin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= 500; ++m) {
      int m2 = 2 * m;
      double coef = m * (bb - m) * xx / ((qam + m2) * (aa + m2));
      d = 1.0 + coef * d;
      if (std::abs(d) < fpmin) d = fpmin;
      c = 1.0 + coef / c;
      if (std::abs(c) < fpmin) c = fpmin;
      d = 1.0 / d;
      h *= d * c;
      coef = -(aa + m) * (qab + m) * xx / ((aa + m2) * (qap + m2));
      d = 1.0 + coef * d;
      if (std::abs(d) < fpmin) d = fpmin;
      c = 1.0 + coef / c;
      if (std::abs(c) < fpmin) c = fpmin;
      d = 1.0 / d;
      double delta = d * c;
      h *= delta;
      if (std::abs(delta - 1.0) < eps) break;
    }
    return h;
  };

  double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                    a * std::log(x) + b * std::log1p(-x);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return std::exp(ln_front) * continued_fraction(a, b, x) / a;
  }
  return 1.0 - std::exp(ln_front) * continued_fraction(b, a, 1.0 - x) / b;
}

TTestResult welch_t_test(const std::vector<double>& member_scores,
                         const std::vector<double>& non_member_scores) {
  if (member_scores.size() < 2 || non_member_scores.size() < 2) {
    throw InsufficientSamples("welch t-test needs >= 2 scores per group");
  }
  Moments m1 = moments(member_scores);
  Moments m2 = moments(non_member_scores);
  double se2 = m1.var / m1.n + m2.var / m2.n;
  if (se2 == 0.0) throw ZeroVariance("both groups have zero variance");

  TTestResult result;
  result.t = (m1.mean - m2.mean) / std::sqrt(se2);
  result.df = se2 * se2 /
              ((m1.var / m1.n) * (m1.var / m1.n) / (m1.n - 1.0) +
               (m2.var / m2.n) * (m2.var / m2.n) / (m2.n - 1.0));
  // Two-tailed Student-t tail mass in terms of the incomplete beta.
  result.p_value = regularized_incomplete_beta(
      result.df / 2.0, 0.5, result.df / (result.df + result.t * result.t));
  return result;
}

double effect_size(const std::vector<double>& member_scores,
                   const std::vector<double>& non_member_scores) {
  if (member_scores.size() < 2 || non_member_scores.size() < 2) {
    throw InsufficientSamples("effect size needs >= 2 scores per group");
  }
  Moments m1 = moments(member_scores);
  Moments m2 = moments(non_member_scores);
  double pooled_var = ((m1.n - 1.0) * m1.var + (m2.n - 1.0) * m2.var) / (m1.n + m2.n - 2.0);
  if (pooled_var == 0.0) throw ZeroVariance("pooled variance is zero");
  return (m1.mean - m2.mean) / std::sqrt(pooled_var);
}

LabeledScores aggregate_documents(const LabeledScores& scores) {
  std::map<std::string, std::vector<const LabeledEntry*>> groups;
  for (const LabeledEntry& e : scores) {
    if (e.document_id.empty()) {
      throw std::invalid_argument("entry '" + e.sequence_id + "' lacks a document_id");
    }
    groups[e.document_id].push_back(&e);
  }

  LabeledScores out;
  out.reserve(groups.size());
  for (const auto& [doc_id, entries] : groups) {
    double sum = 0.0;
    for (const LabeledEntry* e : entries) {
      if (e->label != entries.front()->label) {
        throw MixedLabelsWithinDocument("document '" + doc_id + "' mixes labels");
      }
      sum += e->score;
    }
    LabeledEntry agg;
    agg.sequence_id = doc_id;
    agg.document_id = doc_id;
    agg.score = sum / static_cast<double>(entries.size());
    agg.label = entries.front()->label;
    out.push_back(std::move(agg));
  }
  return out;
}

PcaResult pca_project(const std::vector<LatentVector>& vectors, int components) {
  if (vectors.size() < 2) throw InsufficientVectors("pca needs >= 2 vectors");
  const size_t n = vectors.size();
  const size_t dim = vectors.front().size();
  for (const LatentVector& v : vectors) {
    if (v.size() != dim) throw DimensionMismatch("pca inputs mix dimensions");
  }
  if (components < 1 || static_cast<size_t>(components) > dim ||
      static_cast<size_t>(components) > n - 1) {
    throw InsufficientVectors("components must lie in [1, min(dim, n-1)]");
  }

  Eigen::MatrixXd x(n, dim);
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < dim; ++j) x(i, j) = vectors[i][j];
  }
  Eigen::RowVectorXd mean = x.colwise().mean();
  x.rowwise() -= mean;

  Eigen::MatrixXd cov = x.transpose() * x / static_cast<double>(n - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success) {
    throw InsufficientVectors("eigendecomposition failed");
  }

  double total = 0.0;
  for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i) {
    total += std::max(solver.eigenvalues()(i), 0.0);
  }

  PcaResult result;
  Eigen::MatrixXd basis(dim, components);
  for (int c = 0; c < components; ++c) {
    Eigen::Index idx = static_cast<Eigen::Index>(dim) - 1 - c;  // ascending order inside Eigen
    Eigen::VectorXd v = solver.eigenvectors().col(idx);
    Eigen::Index argmax = 0;
    v.cwiseAbs().maxCoeff(&argmax);
    if (v(argmax) < 0.0) v = -v;
    basis.col(c) = v;

    result.components.emplace_back(v.data(), v.data() + v.size());
    double ev = std::max(solver.eigenvalues()(idx), 0.0);
    result.explained_variance_ratios.push_back(total > 0.0 ? ev / total : 0.0);
  }

  Eigen::MatrixXd proj = x * basis;
  result.projections.reserve(n);
  for (size_t i = 0; i < n; ++i) {
    std::vector<double> row(static_cast<size_t>(components));
    for (int c = 0; c < components; ++c) row[static_cast<size_t>(c)] = proj(i, c);
    result.projections.push_back(std::move(row));
  }
  return result;
}

MetricsReport compute_metrics(const LabeledScores& scores, double fpr_budget) {
  require_both_labels(scores);

  std::vector<double> member_scores;
  std::vector<double> non_member_scores;
  for (const LabeledEntry& e : scores) {
    (e.label == Label::member ? member_scores : non_member_scores).push_back(e.score);
  }

  MetricsReport report;
  BalancedAccuracyResult bacc = balanced_accuracy(scores);
  report.balanced_acc = bacc.acc;
  report.best_threshold = bacc.best_threshold;
  report.auc = auc(scores);
  report.tpr_at_fpr = tpr_at_fpr(scores, fpr_budget);
  report.fpr_budget = fpr_budget;
  TTestResult t = welch_t_test(member_scores, non_member_scores);
  report.t_statistic = t.t;
  report.p_value = t.p_value;
  report.effect_size = effect_size(member_scores, non_member_scores);
  report.n_member = static_cast<int>(member_scores.size());
  report.n_non_member = static_cast<int>(non_member_scores.size());
  return report;
}

void write_roc_csv(const std::vector<RocPoint>& points, const std::filesystem::path& path) {
  std::string body = "threshold,fpr,tpr\n";
  for (const RocPoint& p : points) {
    body += format_double(p.threshold);
    body.push_back(',');
    body += format_double(p.fpr);
    body.push_back(',');
    body += format_double(p.tpr);
    body.push_back('\n');
  }
  atomic_write_file(path, body);
}

void write_pca_csv(const std::vector<PcaExportRow>& rows, const std::filesystem::path& path) {
  std::string body = "id,group,pc1,pc2\n";
  for (const PcaExportRow& row : rows) {
    body += row.id;
    body.push_back(',');
    body += row.group;
    body.push_back(',');
    body += format_double(row.pc1);
    body.push_back(',');
    body += format_double(row.pc2);
    body.push_back('\n');
  }
  atomic_write_file(path, body);
}

}  // namespace blackspectrum
