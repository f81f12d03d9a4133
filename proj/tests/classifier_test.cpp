// Copyright 2026 The nounclass Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "nounclass/classifier.hpp"
#include "synthetic.hpp"

namespace nounclass::classifier {
namespace {

std::vector<std::uint64_t> iota_ids(std::size_t n) {
  std::vector<std::uint64_t> v(n);
  std::iota(v.begin(), v.end(), 0);
  return v;
}

TEST(Split, Sizes) {
  auto s = split(iota_ids(100), {0.75, 1});
  EXPECT_EQ(s.train.size(), 75u);
  EXPECT_EQ(s.eval.size(), 25u);
  auto big = split(iota_ids(6341), {0.75, 1});
  EXPECT_EQ(big.train.size(), 4756u);
  EXPECT_EQ(big.eval.size(), 1585u);
}

TEST(Split, DeterministicAndOrderIndependent) {
  auto ids = iota_ids(50);
  auto a = split(ids, {0.75, 9});
  std::reverse(ids.begin(), ids.end());
  auto b = split(ids, {0.75, 9});
  EXPECT_EQ(a.train, b.train);
  EXPECT_EQ(a.eval, b.eval);
  EXPECT_NE(split(ids, {0.75, 10}).train, a.train);
  std::vector<std::uint64_t> joined = a.train;
  joined.insert(joined.end(), a.eval.begin(), a.eval.end());
  std::sort(joined.begin(), joined.end());
  EXPECT_EQ(joined, iota_ids(50));
}

TEST(Split, DegenerateSizesAreErrors) {
  EXPECT_THROW(split(iota_ids(1), {0.75, 0}), std::invalid_argument);
  EXPECT_THROW(split(iota_ids(2), {0.9, 0}), std::invalid_argument);
  EXPECT_THROW(split(iota_ids(10), {1.0, 0}), std::invalid_argument);
  EXPECT_THROW(split({1, 1, 2}, {0.5, 0}), std::invalid_argument);
}

// Central differences of the loss against the analytic gradient.
void check_gradient(const LinearClassifier& model, const Examples& data, double l2, double tol) {
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  auto g = loss_and_gradient(model, data, order, l2);
  const double h = 1e-6;
  auto rel = [](double a, double b) { return std::abs(a - b) / std::max(1.0, std::max(std::abs(a), std::abs(b))); };
  for (std::size_t i = 0; i < model.weights().size(); ++i) {
    LinearClassifier p = model, m = model;
    p.weights()[i] += h;
    m.weights()[i] -= h;
    double fd = (loss_and_gradient(p, data, order, l2).loss - loss_and_gradient(m, data, order, l2).loss) / (2 * h);
    EXPECT_LT(rel(fd, g.grad_weights[i]), tol) << "weight " << i;
  }
  for (std::size_t k = 0; k < model.bias().size(); ++k) {
    LinearClassifier p = model, m = model;
    p.bias()[k] += h;
    m.bias()[k] -= h;
    double fd = (loss_and_gradient(p, data, order, l2).loss - loss_and_gradient(m, data, order, l2).loss) / (2 * h);
    EXPECT_LT(rel(fd, g.grad_bias[k]), tol) << "bias " << k;
  }
}

// Three points, three classes, two features. At zero weights every class has
// probability 1/3, so dL/dW[k] = mean over points of (1/3 - [y = k]) x.
TEST(Gradient, HandDerivedAtZero) {
  Examples ex;
  ex.dim = 2;
  ex.add(std::vector<double>{1, 0}, 0);
  ex.add(std::vector<double>{0, 1}, 1);
  ex.add(std::vector<double>{1, 1}, 2);
  LinearClassifier model(3, 2);
  std::vector<std::size_t> order{0, 1, 2};
  auto g = loss_and_gradient(model, ex, order, 0.0);
  EXPECT_NEAR(g.loss, std::log(3.0), 1e-12);
  const double third = 1.0 / 3;
  // Column sums of x: (2, 2). Class k's own point contributes -x_k.
  std::vector<double> want = {(2 * third - 1) / 3, (2 * third) / 3, (2 * third) / 3, (2 * third - 1) / 3,
                              (2 * third - 1) / 3, (2 * third - 1) / 3};
  for (std::size_t i = 0; i < 6; ++i) EXPECT_NEAR(g.grad_weights[i], want[i], 1e-12) << i;
  for (double b : g.grad_bias) EXPECT_NEAR(b, 0.0, 1e-12);
  check_gradient(model, ex, 0.0, 1e-6);
}

TEST(Gradient, MatchesFiniteDifferencesAtRandomWeights) {
  auto ex = synthetic::blobs(40, 4, 5, 3);
  LinearClassifier model(4, 5);
  std::mt19937_64 rng(8);
  std::normal_distribution<double> g(0, 0.5);
  for (auto& w : model.weights()) w = g(rng);
  for (auto& b : model.bias()) b = g(rng);
  check_gradient(model, ex, 0.01, 1e-5);
}

TEST(Train, ZeroEpochsGivesUniformPredictor) {
  auto ex = synthetic::blobs(20, 3, 4, 1);
  auto r = train(ex, 3, {0.5, 0, 1e-4, 0, 0});
  for (double w : r.model.weights()) EXPECT_EQ(w, 0.0);
  for (std::size_t i = 0; i < ex.size(); ++i) EXPECT_EQ(r.model.predict(ex.row(i)), 0u);
}

TEST(Train, SeparableTwoClassToy) {
  Examples ex;
  ex.dim = 2;
  ex.add(std::vector<double>{1, 1}, 0);
  ex.add(std::vector<double>{2, 1}, 0);
  ex.add(std::vector<double>{-1, -1}, 1);
  ex.add(std::vector<double>{-2, -1}, 1);
  auto r = train(ex, 2, {0.5, 200, 1e-4, 0, 0});
  EXPECT_DOUBLE_EQ(evaluate(r.model, ex, {"a", "b"}).micro_f1, 1.0);
  EXPECT_LT(r.loss_history.back(), r.loss_history.front());
}

TEST(Train, DivergenceReportsEpoch) {
  auto ex = synthetic::blobs(30, 3, 4, 2);
  try {
    train(ex, 3, {1e300, 5, 0, 0, 0});
    FAIL() << "expected divergence";
  } catch (const TrainingDiverged& e) {
    EXPECT_LE(e.epoch(), 5u);
  }
}

TEST(Train, MiniBatchesAreSeedDependentButReproducible) {
  auto ex = synthetic::blobs(60, 3, 4, 4);
  auto a = train(ex, 3, {0.5, 5, 1e-4, 1, 8});
  auto b = train(ex, 3, {0.5, 5, 1e-4, 1, 8});
  auto c = train(ex, 3, {0.5, 5, 1e-4, 2, 8});
  EXPECT_EQ(a.model.weights(), b.model.weights());
  EXPECT_NE(a.model.weights(), c.model.weights());
}

TEST(Train, SyntheticNineClassesSeparate) {
  auto train_set = synthetic::blobs(500, 9, 16, 21);
  auto eval_set = synthetic::blobs(200, 9, 16, 22);
  auto r = train(train_set, 9, {});
  EXPECT_GE(evaluate(r.model, eval_set, synthetic::class_names(9)).macro_f1, 0.95);
}

TEST(Evaluate, PerfectPredictions) {
  std::vector<std::size_t> y{0, 1, 2, 1};
  auto r = evaluate_predictions(y, y, {"A", "B", "C"});
  for (double f : r.per_class_f1) EXPECT_DOUBLE_EQ(f, 1.0);
  EXPECT_DOUBLE_EQ(r.macro_f1, 1.0);
  EXPECT_DOUBLE_EQ(r.micro_f1, 1.0);
}

TEST(Evaluate, KnownMistakes) {
  std::vector<std::size_t> truth{0, 0, 1, 2}, pred{0, 1, 1, 2};
  auto r = evaluate_predictions(truth, pred, {"A", "B", "C"});
  EXPECT_NEAR(r.per_class_f1[0], 2.0 / 3, 1e-12);
  EXPECT_NEAR(r.per_class_f1[1], 2.0 / 3, 1e-12);
  EXPECT_NEAR(r.per_class_f1[2], 1.0, 1e-12);
  EXPECT_NEAR(r.macro_f1, 7.0 / 9, 1e-12);
  EXPECT_NEAR(r.micro_f1, 0.75, 1e-12);
}

TEST(Evaluate, AbsentClassScoresZero) {
  std::vector<std::size_t> truth{0, 0}, pred{0, 0};
  auto r = evaluate_predictions(truth, pred, {"A", "B"});
  EXPECT_EQ(r.per_class_f1[1], 0.0);
  EXPECT_EQ(r.precision[1], 0.0);
  EXPECT_EQ(r.recall[1], 0.0);
}

TEST(Evaluate, ConfusionRowsSumToSupport) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t K = 1 + trial % 6, n = 1 + trial * 3;
    std::vector<std::size_t> truth(n), pred(n), counts(K, 0);
    for (std::size_t i = 0; i < n; ++i) {
      truth[i] = rng() % K;
      pred[i] = rng() % K;
      ++counts[truth[i]];
    }
    auto r = evaluate_predictions(truth, pred, synthetic::class_names(K));
    for (std::size_t k = 0; k < K; ++k) {
      EXPECT_EQ(std::accumulate(r.confusion[k].begin(), r.confusion[k].end(), std::size_t{0}), counts[k]);
      EXPECT_EQ(r.support[k], counts[k]);
    }
    std::size_t correct = 0;
    for (std::size_t i = 0; i < n; ++i) correct += truth[i] == pred[i];
    EXPECT_DOUBLE_EQ(r.micro_f1, static_cast<double>(correct) / static_cast<double>(n));
  }
}

TEST(MeanCi, HandValues) {
  std::vector<double> same{0.3, 0.3, 0.3};
  EXPECT_DOUBLE_EQ(mean_ci95(same).half_width, 0.0);
  std::vector<double> xs{0.4, 0.5, 0.6};
  auto m = mean_ci95(xs);
  EXPECT_NEAR(m.mean, 0.5, 1e-12);
  EXPECT_NEAR(m.half_width, 1.96 * 0.1 / std::sqrt(3.0), 1e-12);
}

TEST(Aggregate, RepetitionsAndIntervals) {
  auto train_set = synthetic::blobs(90, 3, 4, 5);
  auto eval_set = synthetic::blobs(30, 3, 4, 6);
  auto r = repeat_and_aggregate(3, train_set, eval_set, synthetic::class_names(3), {0.5, 20, 1e-4, 0, 16});
  EXPECT_EQ(r.repetitions, 3u);
  for (const auto& key : {"macro_f1", "micro_f1", "f1:c0", "precision:c1", "recall:c2"}) EXPECT_TRUE(r.ci95.count(key));
  EXPECT_LE(r.ci95.at("macro_f1").first, r.macro_f1);
  EXPECT_GE(r.ci95.at("macro_f1").second, r.macro_f1);
  std::size_t total = 0;
  for (const auto& row : r.confusion) total += std::accumulate(row.begin(), row.end(), std::size_t{0});
  EXPECT_EQ(total, 3 * eval_set.size());
  EXPECT_THROW(repeat_and_aggregate(1, train_set, eval_set, synthetic::class_names(3), {}), std::invalid_argument);
}

TEST(Baseline, SingleClassIsPerfect) {
  auto r = weighted_random_baseline({{"only", 10}}, 5, 1);
  EXPECT_DOUBLE_EQ(r.macro_f1, 1.0);
}

TEST(Baseline, TwoBalancedClassesNearHalf) {
  auto r = weighted_random_baseline({{"a", 50}, {"b", 50}}, 10000, 3);
  EXPECT_NEAR(r.per_class_f1[0], 0.5, 0.02);
  EXPECT_NEAR(r.per_class_f1[1], 0.5, 0.02);
  EXPECT_NEAR(r.macro_f1, 0.5, 0.02);
  EXPECT_DOUBLE_EQ(analytic_weighted_random_macro_f1({{"a", 50}, {"b", 50}}), 0.5);
}

TEST(Baseline, NineClassDistribution) {
  auto counts = synthetic::nine_class_counts();
  auto r = weighted_random_baseline(counts, 200, 7);
  EXPECT_NEAR(analytic_weighted_random_macro_f1(counts), 1.0 / 9, 1e-12);
  EXPECT_NEAR(r.macro_f1, 1.0 / 9, 0.01);
}

TEST(Report, DeterministicBytes) {
  auto train_set = synthetic::blobs(60, 3, 4, 5);
  auto eval_set = synthetic::blobs(30, 3, 4, 6);
  auto run = [&] {
    auto r = repeat_and_aggregate(3, train_set, eval_set, synthetic::class_names(3), {0.5, 30, 1e-4, 4, 0});
    return to_json(r).dump() + confusion_csv(r) + f1_markdown(r, weighted_random_baseline({{"c0", 3}, {"c1", 3}, {"c2", 3}}, 2, 1));
  };
  EXPECT_EQ(run(), run());
}

}  // namespace
}  // namespace nounclass::classifier
