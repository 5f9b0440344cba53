// Copyright 2026 The BlackSpectrum Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "blackspectrum/dataset.hpp"
#include "blackspectrum/embedding.hpp"

namespace blackspectrum {

struct LabeledEntry {
  std::string sequence_id;
  double score = 0.0;
  Label label = Label::non_member;
  std::string document_id;
};

using LabeledScores = std::vector<LabeledEntry>;

struct RocPoint {
  double threshold = 0.0;
  double fpr = 0.0;
  double tpr = 0.0;
};

// One point per distinct score (decision rule: score >= threshold =>
// member) plus the (0,0) endpoint at threshold = +infinity. Monotone in
// both coordinates, ending at (1,1).
std::vector<RocPoint> roc_points(const LabeledScores& scores);

// Mann-Whitney pair statistic: fraction of (member, non-member) pairs
// ordered correctly, ties counting one half.
double auc(const LabeledScores& scores);

// Trapezoidal integral of a ROC curve; agrees with auc() within 1e-9 and
// exists as an independent cross-check.
double auc_trapezoid(const std::vector<RocPoint>& points);

struct BalancedAccuracyResult {
  double acc = 0.0;
  double best_threshold = 0.0;
};

// Max over candidate thresholds (distinct scores and midpoints) of
// (TPR + TNR)/2; accuracy ties resolve to the smaller threshold. The
// optimum is taken over the evaluation set itself, so it is an optimistic
// upper bound.
BalancedAccuracyResult balanced_accuracy(const LabeledScores& scores);

// Max empirical TPR among thresholds with empirical FPR <= budget. Step
// function, no interpolation.
double tpr_at_fpr(const LabeledScores& scores, double fpr_budget);

struct TTestResult {
  double t = 0.0;
  double p_value = 1.0;
  double df = 0.0;
};

// Welch's unequal-variance t-test, two-tailed p via the Student-t
// distribution.
TTestResult welch_t_test(const std::vector<double>& member_scores,
                         const std::vector<double>& non_member_scores);

// Cohen's d with pooled standard deviation.
double effect_size(const std::vector<double>& member_scores,
                   const std::vector<double>& non_member_scores);

// One entry per document: mean score, inherited label, id = document_id.
// Throws MixedLabelsWithinDocument when a document spans both labels.
LabeledScores aggregate_documents(const LabeledScores& scores);

struct PcaResult {
  // One row per input vector, `components` values each.
  std::vector<std::vector<double>> projections;
  std::vector<LatentVector> components;
  std::vector<double> explained_variance_ratios;  // non-increasing, sum <= 1
};

// Mean-centered projection onto the leading eigenvectors of the sample
// covariance. Sign convention: each component's largest-magnitude loading
// is positive.
PcaResult pca_project(const std::vector<LatentVector>& vectors, int components);

struct MetricsReport {
  double balanced_acc = 0.0;
  double best_threshold = 0.0;
  double auc = 0.0;
  double tpr_at_fpr = 0.0;
  double fpr_budget = 0.05;
  double t_statistic = 0.0;
  double p_value = 1.0;
  double effect_size = 0.0;
  int n_member = 0;
  int n_non_member = 0;
};

MetricsReport compute_metrics(const LabeledScores& scores, double fpr_budget = 0.05);

// I_x(a, b), accuracy ~1e-9. Exposed because the t-test builds on it and
// tests pin it against reference values.
double regularized_incomplete_beta(double a, double b, double x);

// "threshold,fpr,tpr" rows; infinities rendered as inf/-inf.
void write_roc_csv(const std::vector<RocPoint>& points, const std::filesystem::path& path);

struct PcaExportRow {
  std::string id;
  std::string group;  // recall_anchor, inference_anchor, member, non_member
  double pc1 = 0.0;
  double pc2 = 0.0;
};

void write_pca_csv(const std::vector<PcaExportRow>& rows, const std::filesystem::path& path);

}  // namespace blackspectrum
