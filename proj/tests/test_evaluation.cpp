// Copyright 2026 The BlackSpectrum Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>

#include "blackspectrum/errors.hpp"
#include "blackspectrum/evaluation.hpp"
#include "blackspectrum/io.hpp"
#include "blackspectrum/rng.hpp"
#include "test_util.hpp"
#include "welch_fixtures.hpp"

using namespace blackspectrum;
using blackspectrum::testing::TempDir;

namespace {

LabeledScores make_scores(const std::vector<double>& member,
                          const std::vector<double>& non_member) {
  LabeledScores out;
  int i = 0;
  for (double s : member) {
    out.push_back({"m" + std::to_string(i++), s, Label::member, "dm"});
  }
  i = 0;
  for (double s : non_member) {
    out.push_back({"n" + std::to_string(i++), s, Label::non_member, "dn"});
  }
  return out;
}

}  // namespace

TEST_CASE("roc endpoints and perfect separation") {
  LabeledScores perfect = make_scores({1.0}, {0.0});
  auto points = roc_points(perfect);
  REQUIRE(points.size() == 3);
  CHECK(points.front().fpr == doctest::Approx(0.0));
  CHECK(points.front().tpr == doctest::Approx(0.0));
  CHECK(std::isinf(points.front().threshold));
  // Passes through (0, 1) before reaching (1, 1).
  CHECK(points[1].fpr == doctest::Approx(0.0));
  CHECK(points[1].tpr == doctest::Approx(1.0));
  CHECK(points.back().fpr == doctest::Approx(1.0));
  CHECK(points.back().tpr == doctest::Approx(1.0));

  // All scores equal: a single step from (0,0) to (1,1), the diagonal.
  LabeledScores flat = make_scores({0.5, 0.5}, {0.5, 0.5});
  auto diag = roc_points(flat);
  REQUIRE(diag.size() == 2);
  CHECK(diag.back().fpr == doctest::Approx(1.0));
  CHECK(diag.back().tpr == doctest::Approx(1.0));

  CHECK_THROWS_AS(roc_points(make_scores({1.0}, {})), DegenerateLabels);
  CHECK_THROWS_AS(roc_points(make_scores({}, {1.0})), DegenerateLabels);
}

TEST_CASE("auc degenerate and tie handling") {
  CHECK(auc(make_scores({1.0, 0.9}, {0.1, 0.0})) == doctest::Approx(1.0));
  CHECK(auc(make_scores({0.0, 0.1}, {0.9, 1.0})) == doctest::Approx(0.0));
  CHECK(auc(make_scores({0.5, 0.5}, {0.5, 0.5})) == doctest::Approx(0.5));
  // Ties count half: members {1, 1} vs non {0, 1} gives pairs
  // 1 + 0.5 + 1 + 0.5 out of 4 -> 0.75.
  CHECK(auc(make_scores({1.0, 1.0}, {0.0, 1.0})) == doctest::Approx(0.75));
}

TEST_CASE("auc matches the trapezoid rule on random score sets") {
  Rng rng(99);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> member(3 + rng.next_index(40));
    std::vector<double> non_member(3 + rng.next_index(40));
    for (double& v : member) v = std::round(rng.next_double() * 20.0) / 20.0;
    for (double& v : non_member) v = std::round(rng.next_double() * 20.0) / 20.0;
    LabeledScores scores = make_scores(member, non_member);
    CHECK(auc(scores) == doctest::Approx(auc_trapezoid(roc_points(scores))).epsilon(1e-9));
  }
}

TEST_CASE("balanced accuracy") {
  // Members {0.9, 0.4}, non-members {0.6, 0.1}: best split classifies
  // three of four correctly on each side average -> 0.75.
  BalancedAccuracyResult r = balanced_accuracy(make_scores({0.9, 0.4}, {0.6, 0.1}));
  CHECK(r.acc == doctest::Approx(0.75));
  // The reported threshold actually achieves the reported accuracy.
  {
    LabeledScores scores = make_scores({0.9, 0.4}, {0.6, 0.1});
    double tp = 0, tn = 0;
    for (const LabeledEntry& e : scores) {
      if (e.label == Label::member && e.score >= r.best_threshold) tp += 1;
      if (e.label == Label::non_member && e.score < r.best_threshold) tn += 1;
    }
    CHECK((tp / 2 + tn / 2) / 2 == doctest::Approx(0.75));
  }

  CHECK(balanced_accuracy(make_scores({1.0, 0.9}, {0.1, 0.0})).acc == doctest::Approx(1.0));
  CHECK(balanced_accuracy(make_scores({0.5}, {0.5})).acc == doctest::Approx(0.5));

  // Ties resolve toward the smaller threshold.
  LabeledScores two = make_scores({1.0}, {0.0});
  BalancedAccuracyResult best = balanced_accuracy(two);
  CHECK(best.acc == doctest::Approx(1.0));
  CHECK(best.best_threshold <= 1.0);
  CHECK(best.best_threshold > 0.0);
}

TEST_CASE("tpr at fixed fpr") {
  CHECK(tpr_at_fpr(make_scores({1.0, 0.9}, {0.1, 0.0}), 0.05) == doctest::Approx(1.0));

  // 10 non-members at budget 0.05: no false positive is affordable, so the
  // result is the TPR of the strictest threshold with fpr = 0.
  std::vector<double> member{0.95, 0.8, 0.7, 0.6, 0.5};
  std::vector<double> non_member{0.9, 0.45, 0.4, 0.35, 0.3, 0.25, 0.2, 0.15, 0.1, 0.05};
  double tpr = tpr_at_fpr(make_scores(member, non_member), 0.05);
  CHECK(tpr == doctest::Approx(0.2));  // only 0.95 clears the 0.9 non-member

  // A larger budget admits the high-scoring non-member.
  CHECK(tpr_at_fpr(make_scores(member, non_member), 0.10) == doctest::Approx(1.0));

  CHECK_THROWS_AS(tpr_at_fpr(make_scores({1.0}, {0.0}), -0.1), std::invalid_argument);
  CHECK_THROWS_AS(tpr_at_fpr(make_scores({1.0}, {0.0}), 1.1), std::invalid_argument);
}

TEST_CASE("welch t-test basics") {
  TTestResult equal = welch_t_test({1, 2, 3}, {1, 2, 3});
  CHECK(equal.t == doctest::Approx(0.0));
  CHECK(equal.p_value == doctest::Approx(1.0));

  TTestResult strong = welch_t_test({10, 10, 10.1}, {0, 0, 0.1});
  CHECK(strong.t == doctest::Approx(212.1320343559646).epsilon(1e-9));
  CHECK(strong.p_value == doctest::Approx(2.9625240566931835e-09).epsilon(1e-6));

  CHECK_THROWS_AS(welch_t_test({1.0}, {1, 2, 3}), InsufficientSamples);
  CHECK_THROWS_AS(welch_t_test({}, {1, 2}), InsufficientSamples);
  CHECK_THROWS_AS(welch_t_test({1, 1, 1}, {2, 2, 2}), ZeroVariance);
}

TEST_CASE("welch t-test matches frozen reference values") {
  for (const auto& fixture : blackspectrum::testing::welch_fixtures()) {
    TTestResult r = welch_t_test(fixture.a, fixture.b);
    CHECK(r.t == doctest::Approx(fixture.expected_t).epsilon(1e-9));
    CHECK(std::fabs(r.p_value - fixture.expected_p) <= 1e-6);
  }
}

TEST_CASE("regularized incomplete beta sanity") {
  CHECK(regularized_incomplete_beta(1.0, 1.0, 0.3) == doctest::Approx(0.3));
  CHECK(regularized_incomplete_beta(2.0, 2.0, 0.5) == doctest::Approx(0.5));
  CHECK(regularized_incomplete_beta(2.0, 3.0, 0.0) == doctest::Approx(0.0));
  CHECK(regularized_incomplete_beta(2.0, 3.0, 1.0) == doctest::Approx(1.0));
  // I_x(2,3) = x^2 (6 - 8x + 3x^2)
  double x = 0.37;
  CHECK(regularized_incomplete_beta(2.0, 3.0, x) ==
        doctest::Approx(x * x * (6 - 8 * x + 3 * x * x)).epsilon(1e-12));
}

TEST_CASE("effect size") {
  CHECK(effect_size({1, 2, 3}, {1, 2, 3}) == doctest::Approx(0.0));
  // Means one pooled SD apart: d = 1 by construction.
  CHECK(effect_size({1, 3}, {3, 5}) == doctest::Approx(-std::sqrt(2.0)));
  CHECK(effect_size({2, 4}, {1, 3}) == doctest::Approx([] {
          double pooled = std::sqrt(2.0);  // both variances are 2
          return (3.0 - 2.0) / pooled;
        }()));
  CHECK_THROWS_AS(effect_size({1, 1}, {1, 1}), ZeroVariance);
  CHECK_THROWS_AS(effect_size({1.0}, {1, 2}), InsufficientSamples);
}

TEST_CASE("document aggregation") {
  LabeledScores scores{{"d1:0", 0.2, Label::member, "d1"},
                       {"d1:1", 0.4, Label::member, "d1"},
                       {"solo:0", 0.7, Label::non_member, "solo"}};
  LabeledScores docs = aggregate_documents(scores);
  REQUIRE(docs.size() == 2);
  CHECK(docs[0].sequence_id == "d1");
  CHECK(docs[0].score == doctest::Approx(0.3));
  CHECK(docs[0].label == Label::member);
  CHECK(docs[1].score == doctest::Approx(0.7));  // single sequence unchanged

  LabeledScores mixed{{"d:0", 0.2, Label::member, "d"},
                      {"d:1", 0.4, Label::non_member, "d"}};
  CHECK_THROWS_AS(aggregate_documents(mixed), MixedLabelsWithinDocument);
}

TEST_CASE("pca on crafted geometry") {
  // Collinear points: one component explains everything.
  std::vector<LatentVector> line{{0, 0}, {1, 2}, {2, 4}, {3, 6}};
  PcaResult pr = pca_project(line, 1);
  REQUIRE(pr.explained_variance_ratios.size() == 1);
  CHECK(pr.explained_variance_ratios[0] == doctest::Approx(1.0));
  REQUIRE(pr.projections.size() == 4);

  // Two-point set along x: the first component is (1, 0) after the sign
  // convention (largest-magnitude loading positive).
  PcaResult two = pca_project({{1, 0}, {-1, 0}}, 1);
  CHECK(two.components[0][0] == doctest::Approx(1.0));
  CHECK(two.components[0][1] == doctest::Approx(0.0).epsilon(1e-9));

  // Ratios are non-increasing and components orthonormal.
  Rng rng(7);
  std::vector<LatentVector> cloud;
  for (int i = 0; i < 40; ++i) {
    LatentVector v(5);
    for (size_t d = 0; d < 5; ++d) v[d] = rng.next_double() * (d == 0 ? 4.0 : 1.0);
    cloud.push_back(v);
  }
  PcaResult full = pca_project(cloud, 3);
  for (size_t i = 1; i < full.explained_variance_ratios.size(); ++i) {
    CHECK(full.explained_variance_ratios[i - 1] >= full.explained_variance_ratios[i]);
  }
  for (size_t i = 0; i < full.components.size(); ++i) {
    CHECK(l2_norm(full.components[i]) == doctest::Approx(1.0));
    for (size_t j = i + 1; j < full.components.size(); ++j) {
      CHECK(dot(full.components[i], full.components[j]) == doctest::Approx(0.0));
    }
  }

  CHECK_THROWS_AS(pca_project({{1, 2}}, 1), InsufficientVectors);
  CHECK_THROWS_AS(pca_project({{1, 2}, {3, 4}}, 2), InsufficientVectors);
  CHECK_THROWS_AS(pca_project({}, 1), InsufficientVectors);
}

TEST_CASE("compute_metrics ties the pieces together") {
  LabeledScores scores =
      make_scores({0.9, 0.8, 0.7, 0.85}, {0.2, 0.3, 0.1, 0.25});
  MetricsReport r = compute_metrics(scores, 0.05);
  CHECK(r.auc == doctest::Approx(1.0));
  CHECK(r.balanced_acc == doctest::Approx(1.0));
  CHECK(r.tpr_at_fpr == doctest::Approx(1.0));
  CHECK(r.n_member == 4);
  CHECK(r.n_non_member == 4);
  CHECK(r.t_statistic > 0.0);
  CHECK(r.p_value < 0.01);
  CHECK(r.effect_size > 1.0);
  CHECK(r.fpr_budget == doctest::Approx(0.05));
}

TEST_CASE("csv exports") {
  TempDir dir("csv");
  auto roc_path = dir / "roc.csv";
  write_roc_csv(roc_points(make_scores({1.0}, {0.0})), roc_path);
  std::string roc = read_file(roc_path);
  CHECK(roc.rfind("threshold,fpr,tpr\n", 0) == 0);
  CHECK(roc.find("inf") != std::string::npos);

  auto pca_path = dir / "pca.csv";
  write_pca_csv({{"a", "member", 0.25, -1.5}}, pca_path);
  std::string pca = read_file(pca_path);
  CHECK(pca.rfind("id,group,pc1,pc2\n", 0) == 0);
  CHECK(pca.find("a,member,0.25,-1.5") != std::string::npos);
}
