/*
 * Copyright 2026 The seqfactor Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "seqfactor/evaluation.h"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "oracles.h"

namespace seqfactor {
namespace {

using V = std::vector<int>;

TEST(Metrics, PerfectPredictions) {
  V y = {0, 1, 2, 2, 1, 0, 3};
  MetricsReport r = classification_metrics(y, y, 4);
  EXPECT_EQ(r.accuracy, 1.0);
  EXPECT_EQ(r.precision, 1.0);
  EXPECT_EQ(r.recall, 1.0);
  EXPECT_EQ(r.f1, 1.0);
}

TEST(Metrics, TwoClassHandCount) {
  // Confusion [[1,1],[1,1]]: every class has P = R = F1 = 0.5.
  MetricsReport r = classification_metrics(V{0, 0, 1, 1}, V{0, 1, 0, 1}, 2);
  EXPECT_EQ(r.accuracy, 0.5);
  EXPECT_EQ(r.f1, 0.5);
  EXPECT_EQ(r.confusion, (std::vector<std::vector<int>>{{1, 1}, {1, 1}}));
}

TEST(Metrics, MacroOverPresentClassesOnly) {
  // Labels use classes 0 and 1 of 3. Class 2 is predicted once (a false
  // positive) but has no support, so it is left out of the average.
  V pred = {0, 0, 1, 2};
  V lab = {0, 0, 1, 1};
  MetricsReport r = classification_metrics(pred, lab, 3);
  // class 0: P=1 R=1 F=1; class 1: P=1 R=0.5 F=2/3.
  EXPECT_NEAR(r.precision, 1.0, 1e-12);
  EXPECT_NEAR(r.recall, 0.75, 1e-12);
  EXPECT_NEAR(r.f1, (1.0 + 2.0 / 3.0) / 2.0, 1e-12);
  EXPECT_EQ(r.accuracy, 0.75);
  EXPECT_EQ(r.per_class[2].predicted, 1);
  EXPECT_EQ(r.per_class[2].f1, 0.0);
}

TEST(Metrics, MicroEqualsAccuracy) {
  V pred = {0, 2, 1, 1, 0};
  V lab = {0, 1, 1, 2, 0};
  MetricsReport r = classification_metrics(pred, lab, 3, Averaging::kMicro);
  EXPECT_EQ(r.f1, r.accuracy);
  EXPECT_EQ(r.precision, 0.6);
}

TEST(Metrics, ZeroF1WhenNoHits) {
  MetricsReport r = classification_metrics(V{1, 1}, V{0, 0}, 2);
  EXPECT_EQ(r.per_class[0].f1, 0.0);
  EXPECT_EQ(r.f1, 0.0);
}

TEST(Metrics, ConfusionSumsAndRelabeling) {
  Rng rng(1);
  V pred, lab;
  for (int i = 0; i < 300; ++i) {
    pred.push_back(uniform_index(rng, 5));
    lab.push_back(uniform_index(rng, 5));
  }
  MetricsReport r = classification_metrics(pred, lab, 5);
  int total = 0;
  for (const auto& row : r.confusion)
    for (int c : row) total += c;
  EXPECT_EQ(total, 300);
  const int perm[5] = {3, 0, 4, 1, 2};
  V pp, ll;
  for (int i = 0; i < 300; ++i) {
    pp.push_back(perm[pred[i]]);
    ll.push_back(perm[lab[i]]);
  }
  EXPECT_NEAR(classification_metrics(pp, ll, 5).f1, r.f1, 1e-12);
}

TEST(Metrics, Errors) {
  EXPECT_THROW(classification_metrics(V{0, 1}, V{0}, 2), InputError);
  EXPECT_THROW(classification_metrics(V{0, 5}, V{0, 1}, 2), InputError);
}

TEST(DemographicParity, Examples) {
  // Identical rates.
  EXPECT_EQ(*demographic_parity(V{1, 0, 1, 0}, V{1, 1, 0, 0}, 1), 1.0);
  // Group 1 predicts s in 2/4 cases, group 0 in 1/4.
  V pred = {1, 1, 0, 0, 1, 0, 0, 0};
  V attr = {1, 1, 1, 1, 0, 0, 0, 0};
  EXPECT_DOUBLE_EQ(*demographic_parity(pred, attr, 1), 2.0);
  // Group 0 never receives s.
  EXPECT_FALSE(demographic_parity(V{1, 0, 0}, V{1, 0, 0}, 1).has_value());
  // Empty group 0.
  EXPECT_FALSE(demographic_parity(V{1, 0}, V{1, 1}, 1).has_value());
}

TEST(EqualOpportunity, Examples) {
  V y = {0, 1, 0, 1};
  EXPECT_EQ(*equal_opportunity(y, y, V{1, 1, 0, 0}, 1), 1.0);
  // Group 1: true s four times, hit twice (0.5). Group 0: hit once (0.25).
  V lab = {2, 2, 2, 2, 2, 2, 2, 2};
  V pred = {2, 2, 0, 0, 2, 0, 0, 0};
  V attr = {1, 1, 1, 1, 0, 0, 0, 0};
  EXPECT_DOUBLE_EQ(*equal_opportunity(pred, lab, attr, 2), 2.0);
  // No positives in group 0.
  EXPECT_FALSE(equal_opportunity(V{2, 0}, V{2, 0}, V{1, 0}, 2).has_value());
}

TEST(Bias, GroupSwapGivesReciprocals) {
  Rng rng(2);
  V pred, lab, attr, swapped;
  for (int i = 0; i < 400; ++i) {
    pred.push_back(uniform_index(rng, 3));
    lab.push_back(uniform_index(rng, 3));
    attr.push_back(uniform_index(rng, 2));
    swapped.push_back(1 - attr.back());
  }
  for (int s = 0; s < 3; ++s) {
    EXPECT_NEAR(*demographic_parity(pred, attr, s) *
                    *demographic_parity(pred, swapped, s), 1.0, 1e-12);
    EXPECT_NEAR(*equal_opportunity(pred, lab, attr, s) *
                    *equal_opportunity(pred, lab, swapped, s), 1.0, 1e-12);
  }
}

TEST(Bias, AuditFlagsAndBalance) {
  V pred = {1, 1, 0, 0, 1, 0, 0, 0};
  V lab = {1, 1, 1, 1, 1, 1, 1, 1};
  V attr = {1, 1, 1, 1, 0, 0, 0, 0};
  BiasReport r = bias_audit(pred, lab, {{"g", attr}}, 2);
  ASSERT_EQ(r.entries.size(), 2u);
  const BiasEntry& e = r.entries[1];
  EXPECT_EQ(e.attribute, "g");
  EXPECT_EQ(e.service, 1);
  EXPECT_DOUBLE_EQ(*e.demographic_parity, 2.0);
  EXPECT_DOUBLE_EQ(*e.demographic_parity_balance, 0.5);
  EXPECT_TRUE(e.demographic_parity_flag);
  // Service 0 is never a true label: opportunity is undefined, and an
  // undefined ratio cannot pass the four-fifths rule, so it is flagged.
  EXPECT_FALSE(r.entries[0].equal_opportunity.has_value());
  EXPECT_TRUE(r.entries[0].equal_opportunity_flag);
  EXPECT_FALSE(r.entries[0].equal_opportunity_balance.has_value());
  EXPECT_GE(*r.entries[0].demographic_parity, 0.0);
}

TEST(TTest, HandComputedExample) {
  // d = [-1, 0, -1]: mean -2/3, sd = sqrt(1/3), t = mean / (sd / sqrt 3).
  std::vector<double> a = {1, 2, 3}, b = {2, 2, 4};
  TTestResult r = paired_t_test(a, b);
  const double mean = -2.0 / 3.0;
  const double sd = std::sqrt(((1.0 / 9) + (4.0 / 9) + (1.0 / 9)) / 2.0);
  const double t = mean / (sd / std::sqrt(3.0));
  EXPECT_NEAR(r.t, t, 1e-12);
  EXPECT_NEAR(r.t, -2.0, 1e-12);
  EXPECT_EQ(r.dof, 2);
  // Two degrees of freedom: P(|T| > t) = 1 - t / sqrt(2 + t^2).
  EXPECT_NEAR(r.p, 1.0 - 2.0 / std::sqrt(6.0), 1e-9);
}

TEST(TTest, DegenerateCases) {
  std::vector<double> a = {0.3, 0.5, 0.9, 0.1};
  TTestResult same = paired_t_test(a, a);
  EXPECT_EQ(same.t, 0.0);
  EXPECT_EQ(same.p, 1.0);
  std::vector<double> b = {0.2, 0.4, 0.8, 0.0};
  TTestResult shift = paired_t_test(a, b);
  EXPECT_TRUE(shift.capped || shift.p < 1e-6);
  TTestResult exact = paired_t_test(std::vector<double>{1, 2, 3}, std::vector<double>{0, 1, 2});
  EXPECT_TRUE(exact.capped);
  EXPECT_EQ(exact.p, 0.0);
  EXPECT_EQ(exact.t, kTCap);
  EXPECT_THROW(paired_t_test(std::vector<double>{1}, std::vector<double>{2}), InputError);
  EXPECT_THROW(paired_t_test(a, std::vector<double>{1, 2}), InputError);
}

TEST(TTest, SelfComparisonAlwaysPOne) {
  Rng rng(3);
  for (int n = 2; n < 12; ++n) {
    std::vector<double> a;
    for (int i = 0; i < n; ++i) a.push_back(uniform01(rng));
    EXPECT_EQ(paired_t_test(a, a).p, 1.0);
  }
}

TEST(TTest, MatchesStudentsTOneDof) {
  // One degree of freedom is Cauchy: P(|T| > t) = 1 - 2 atan(t) / pi.
  std::vector<double> a = {3.0, 1.0}, b = {1.0, 0.5};
  TTestResult r = paired_t_test(a, b);
  // d = [2, 0.5]: mean 1.25, sd = sqrt(1.125), t = 1.25 / (sd / sqrt 2).
  const double t = 1.25 / (std::sqrt(1.125) / std::sqrt(2.0));
  EXPECT_NEAR(r.t, t, 1e-12);
  EXPECT_NEAR(r.p, 1.0 - 2.0 * std::atan(t) / M_PI, 1e-9);
}

TEST(Markov, DeterministicChain) {
  Matrix T = Matrix::Zero(3, 3);
  T(0, 1) = T(1, 2) = T(2, 0) = 1.0;
  std::vector<Window> ws = {{0, {0, 1, 2}, 0}, {0, {1, 2, 0}, 1}, {0, {2, 0, 1}, 2}};
  V got = markov_baseline(T, ws, 0);
  EXPECT_EQ(got, (V{0, 1, 2}));
}

TEST(Markov, AlternatingData) {
  Matrix T = build_transitions({{0, 1, 0, 1, 0, 1}}, 2);
  std::vector<Window> ws = {{0, {0, 1}, 0}, {0, {1, 0}, 1}, {0, {0, 1}, 0}};
  EXPECT_EQ(markov_baseline(T, ws, 0), (V{0, 1, 0}));
}

TEST(Markov, LastRealServiceAndSeededFallback) {
  Matrix T = Matrix::Zero(4, 4);
  T(1, 3) = 1.0;
  std::vector<Window> ws = {{0, {kPad, 1, kPad}, 0}};
  EXPECT_EQ(markov_baseline(T, ws, 0), V{3});
  std::vector<Window> pad(30, Window{0, {kPad, kPad, kPad}, 0});
  V a = markov_baseline(T, pad, 7), b = markov_baseline(T, pad, 7);
  EXPECT_EQ(a, b);
  for (int s : a) {
    EXPECT_GE(s, 0);
    EXPECT_LT(s, 4);
  }
  EXPECT_NE(a, markov_baseline(T, pad, 8));
}

TEST(OneHot, Layout) {
  std::vector<Window> ws = {{0, {2, kPad, 0}, 1}};
  Matrix Z = one_hot_history(ws, 3);
  ASSERT_EQ(Z.cols(), 9);
  Matrix expect = Matrix::Zero(1, 9);
  expect(0, 2) = 1;
  expect(0, 6) = 1;
  EXPECT_EQ(Z, expect);
}

}  // namespace
}  // namespace seqfactor
