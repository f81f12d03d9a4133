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

// Supervised class prediction over frozen embeddings: a multinomial logistic
// regression head, F1/confusion evaluation, repetition statistics and a
// probability-weighted random baseline.

#ifndef NOUNCLASS_CLASSIFIER_HPP_
#define NOUNCLASS_CLASSIFIER_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "nounclass/io.hpp"

namespace nounclass::classifier {

// ---------------------------------------------------------------------------
// Split

struct SplitSpec {
  double train_fraction = 0.75;
  std::uint64_t seed = 0;
};

struct Split {
  std::vector<std::uint64_t> train;
  std::vector<std::uint64_t> eval;
};

/// Unstratified shuffle split; |train| = round(train_fraction * N).
/// Depends only on the id set and the seed, not on input order.
inline Split split(std::vector<std::uint64_t> ids, const SplitSpec& spec) {
  if (!(spec.train_fraction > 0 && spec.train_fraction < 1)) throw std::invalid_argument("train_fraction must be in (0, 1)");
  if (ids.size() < 2) throw std::invalid_argument("split needs at least 2 records");
  std::sort(ids.begin(), ids.end());
  if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) throw std::invalid_argument("split: duplicate record ids");
  const auto n_train = static_cast<std::size_t>(std::llround(spec.train_fraction * static_cast<double>(ids.size())));
  if (n_train == 0 || n_train == ids.size())
    throw std::invalid_argument("split of " + std::to_string(ids.size()) + " records leaves an empty side");
  std::mt19937_64 rng(spec.seed);
  io::shuffle(ids, rng);
  Split s;
  s.train.assign(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n_train));
  s.eval.assign(ids.begin() + static_cast<std::ptrdiff_t>(n_train), ids.end());
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.eval.begin(), s.eval.end());
  return s;
}

// ---------------------------------------------------------------------------
// Model

/// Dense labelled examples, row-major.
struct Examples {
  std::size_t dim = 0;
  std::vector<double> x;
  std::vector<std::size_t> y;

  std::size_t size() const { return y.size(); }
  std::span<const double> row(std::size_t i) const { return {x.data() + i * dim, dim}; }
  void add(std::span<const double> features, std::size_t label) {
    if (features.size() != dim) throw std::invalid_argument("example has wrong dimension");
    x.insert(x.end(), features.begin(), features.end());
    y.push_back(label);
  }
};

class LinearClassifier {
 public:
  LinearClassifier(std::size_t num_classes, std::size_t dim)
      : num_classes_(num_classes), dim_(dim), weights_(num_classes * dim, 0.0), bias_(num_classes, 0.0) {
    if (num_classes == 0 || dim == 0) throw std::invalid_argument("classifier needs at least one class and one feature");
  }

  std::size_t num_classes() const { return num_classes_; }
  std::size_t dim() const { return dim_; }
  std::vector<double>& weights() { return weights_; }
  const std::vector<double>& weights() const { return weights_; }
  std::vector<double>& bias() { return bias_; }
  const std::vector<double>& bias() const { return bias_; }

  std::vector<double> logits(std::span<const double> x) const {
    if (x.size() != dim_) throw std::invalid_argument("input has wrong dimension");
    std::vector<double> z(bias_);
    for (std::size_t k = 0; k < num_classes_; ++k)
      for (std::size_t j = 0; j < dim_; ++j) z[k] += weights_[k * dim_ + j] * x[j];
    return z;
  }

  /// Argmax; ties go to the lowest class index.
  std::size_t predict(std::span<const double> x) const { return argmax(logits(x)); }

  static std::size_t argmax(const std::vector<double>& z) {
    return static_cast<std::size_t>(std::max_element(z.begin(), z.end()) - z.begin());
  }

 private:
  std::size_t num_classes_, dim_;
  std::vector<double> weights_;  // num_classes x dim
  std::vector<double> bias_;
};

struct LossGradient {
  double loss = 0;
  std::vector<double> grad_weights;
  std::vector<double> grad_bias;
};

/// Mean cross-entropy plus (l2/2)||W||^2 (bias unpenalized) over `order`,
/// summed in that order.
inline LossGradient loss_and_gradient(const LinearClassifier& model, const Examples& data,
                                      std::span<const std::size_t> order, double l2) {
  const std::size_t K = model.num_classes(), D = model.dim();
  LossGradient g;
  g.grad_weights.assign(K * D, 0.0);
  g.grad_bias.assign(K, 0.0);
  if (order.empty()) throw std::invalid_argument("loss over no examples");
  std::vector<double> p(K);
  for (std::size_t i : order) {
    auto x = data.row(i);
    auto z = model.logits(x);
    const double zmax = *std::max_element(z.begin(), z.end());
    double sum = 0;
    for (std::size_t k = 0; k < K; ++k) sum += (p[k] = std::exp(z[k] - zmax));
    const double log_sum = zmax + std::log(sum);
    g.loss += log_sum - z[data.y[i]];
    for (std::size_t k = 0; k < K; ++k) {
      double r = p[k] / sum - (k == data.y[i] ? 1.0 : 0.0);
      g.grad_bias[k] += r;
      for (std::size_t j = 0; j < D; ++j) g.grad_weights[k * D + j] += r * x[j];
    }
  }
  const double inv = 1.0 / static_cast<double>(order.size());
  g.loss *= inv;
  for (auto& v : g.grad_bias) v *= inv;
  double sq = 0;
  for (std::size_t i = 0; i < K * D; ++i) {
    g.grad_weights[i] = g.grad_weights[i] * inv + l2 * model.weights()[i];
    sq += model.weights()[i] * model.weights()[i];
  }
  g.loss += 0.5 * l2 * sq;
  return g;
}

struct TrainParams {
  double learning_rate = 0.5;
  std::size_t epochs = 300;
  double l2 = 1e-4;
  std::uint64_t seed = 0;
  /// 0 = full batch. Otherwise shuffled mini-batches of this size per epoch.
  std::size_t batch_size = 0;
};

class TrainingDiverged : public std::runtime_error {
 public:
  explicit TrainingDiverged(std::size_t epoch)
      : std::runtime_error("training loss became non-finite at epoch " + std::to_string(epoch)), epoch_(epoch) {}
  std::size_t epoch() const { return epoch_; }

 private:
  std::size_t epoch_;
};

struct TrainResult {
  LinearClassifier model;
  std::vector<double> loss_history;  // training loss before each epoch's update
};

/// Gradient descent from all-zero weights. The seed fixes the example order
/// (summation order for full batches, batch composition otherwise).
inline TrainResult train(const Examples& data, std::size_t num_classes, const TrainParams& params) {
  if (data.size() == 0) throw std::invalid_argument("no training examples");
  for (auto y : data.y)
    if (y >= num_classes) throw std::invalid_argument("label out of range");
  TrainResult out{LinearClassifier(num_classes, data.dim), {}};
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(params.seed);
  io::shuffle(order, rng);
  auto& W = out.model.weights();
  auto& b = out.model.bias();
  for (std::size_t epoch = 0; epoch < params.epochs; ++epoch) {
    if (params.batch_size == 0 || params.batch_size >= order.size()) {
      auto g = loss_and_gradient(out.model, data, order, params.l2);
      if (!std::isfinite(g.loss)) throw TrainingDiverged(epoch);
      out.loss_history.push_back(g.loss);
      for (std::size_t i = 0; i < W.size(); ++i) W[i] -= params.learning_rate * g.grad_weights[i];
      for (std::size_t k = 0; k < b.size(); ++k) b[k] -= params.learning_rate * g.grad_bias[k];
    } else {
      io::shuffle(order, rng);
      double epoch_loss = 0;
      for (std::size_t start = 0; start < order.size(); start += params.batch_size) {
        std::span<const std::size_t> batch(order.data() + start, std::min(params.batch_size, order.size() - start));
        auto g = loss_and_gradient(out.model, data, batch, params.l2);
        if (!std::isfinite(g.loss)) throw TrainingDiverged(epoch);
        epoch_loss += g.loss * static_cast<double>(batch.size());
        for (std::size_t i = 0; i < W.size(); ++i) W[i] -= params.learning_rate * g.grad_weights[i];
        for (std::size_t k = 0; k < b.size(); ++k) b[k] -= params.learning_rate * g.grad_bias[k];
      }
      out.loss_history.push_back(epoch_loss / static_cast<double>(order.size()));
    }
  }
  for (double w : W)
    if (!std::isfinite(w)) throw TrainingDiverged(params.epochs);
  return out;
}

// ---------------------------------------------------------------------------
// Evaluation

/// Confusion rows are true classes, columns predicted. F1 uses 0/0 = 0.
/// For aggregated reports metrics are means over repetitions and the
/// confusion matrix is summed.
struct EvalReport {
  std::vector<std::string> classes;
  std::vector<double> precision, recall, per_class_f1;
  std::vector<std::size_t> support;
  double macro_f1 = 0;
  double micro_f1 = 0;
  std::vector<std::vector<std::size_t>> confusion;
  std::size_t repetitions = 1;
  std::map<std::string, std::pair<double, double>> ci95;
};

inline double safe_ratio(double num, double den) { return den == 0 ? 0.0 : num / den; }

inline EvalReport evaluate_predictions(std::span<const std::size_t> truth, std::span<const std::size_t> predicted,
                                       const std::vector<std::string>& classes) {
  if (truth.size() != predicted.size()) throw std::invalid_argument("truth and predictions differ in length");
  const std::size_t K = classes.size();
  EvalReport r;
  r.classes = classes;
  r.confusion.assign(K, std::vector<std::size_t>(K, 0));
  std::size_t correct = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] >= K || predicted[i] >= K) throw std::invalid_argument("label out of range");
    ++r.confusion[truth[i]][predicted[i]];
    correct += truth[i] == predicted[i];
  }
  r.precision.assign(K, 0);
  r.recall.assign(K, 0);
  r.per_class_f1.assign(K, 0);
  r.support.assign(K, 0);
  for (std::size_t k = 0; k < K; ++k) {
    std::size_t tp = r.confusion[k][k], row = 0, col = 0;
    for (std::size_t j = 0; j < K; ++j) {
      row += r.confusion[k][j];
      col += r.confusion[j][k];
    }
    r.support[k] = row;
    r.precision[k] = safe_ratio(static_cast<double>(tp), static_cast<double>(col));
    r.recall[k] = safe_ratio(static_cast<double>(tp), static_cast<double>(row));
    r.per_class_f1[k] = safe_ratio(2.0 * static_cast<double>(tp), static_cast<double>(row + col));
  }
  r.macro_f1 = K == 0 ? 0.0 : std::accumulate(r.per_class_f1.begin(), r.per_class_f1.end(), 0.0) / static_cast<double>(K);
  r.micro_f1 = safe_ratio(static_cast<double>(correct), static_cast<double>(truth.size()));
  return r;
}

inline EvalReport evaluate(const LinearClassifier& model, const Examples& data, const std::vector<std::string>& classes) {
  std::vector<std::size_t> pred(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) pred[i] = model.predict(data.row(i));
  return evaluate_predictions(data.y, pred, classes);
}

struct MeanCI {
  double mean = 0;
  double half_width = 0;
};

/// Mean and normal-approximation 95% interval, 1.96 * sd / sqrt(n), where sd
/// is the sample standard deviation (n - 1 denominator; 0 for one value).
inline MeanCI mean_ci95(std::span<const double> xs) {
  if (xs.empty()) throw std::invalid_argument("mean of nothing");
  const double n = static_cast<double>(xs.size());
  double mean = 0;
  for (double x : xs) mean += x;
  mean /= n;
  double var = 0;
  for (double x : xs) var += (x - mean) * (x - mean);
  var = xs.size() > 1 ? var / (n - 1) : 0.0;
  return {mean, 1.96 * std::sqrt(var) / std::sqrt(n)};
}

inline constexpr const char* kCiConvention = "mean +/- 1.96 * sample_sd / sqrt(repetitions), sample_sd with n - 1 denominator";
inline constexpr const char* kF1Convention = "precision, recall and F1 of 0/0 are 0; micro F1 equals accuracy";

inline EvalReport aggregate(const std::vector<EvalReport>& runs) {
  if (runs.empty()) throw std::invalid_argument("aggregate of no runs");
  const std::size_t K = runs.front().classes.size();
  EvalReport out;
  out.classes = runs.front().classes;
  out.repetitions = runs.size();
  out.confusion.assign(K, std::vector<std::size_t>(K, 0));
  out.support.assign(K, 0);
  auto summarize = [&](const std::string& name, auto&& get) {
    std::vector<double> xs;
    for (const auto& r : runs) xs.push_back(get(r));
    auto m = mean_ci95(xs);
    out.ci95[name] = {m.mean - m.half_width, m.mean + m.half_width};
    return m.mean;
  };
  out.macro_f1 = summarize("macro_f1", [](const EvalReport& r) { return r.macro_f1; });
  out.micro_f1 = summarize("micro_f1", [](const EvalReport& r) { return r.micro_f1; });
  for (std::size_t k = 0; k < K; ++k) {
    out.per_class_f1.push_back(summarize("f1:" + out.classes[k], [k](const EvalReport& r) { return r.per_class_f1[k]; }));
    out.precision.push_back(summarize("precision:" + out.classes[k], [k](const EvalReport& r) { return r.precision[k]; }));
    out.recall.push_back(summarize("recall:" + out.classes[k], [k](const EvalReport& r) { return r.recall[k]; }));
  }
  for (const auto& r : runs) {
    if (r.classes != out.classes) throw std::invalid_argument("aggregate over differing class lists");
    for (std::size_t i = 0; i < K; ++i) {
      out.support[i] += r.support[i];
      for (std::size_t j = 0; j < K; ++j) out.confusion[i][j] += r.confusion[i][j];
    }
  }
  return out;
}

/// Trains `n` models on the same split with seeds seed, seed+1, ... and
/// aggregates their evaluation reports.
inline EvalReport repeat_and_aggregate(std::size_t n, const Examples& train_set, const Examples& eval_set,
                                       const std::vector<std::string>& classes, const TrainParams& params) {
  if (n < 2) throw std::invalid_argument("repeat_and_aggregate needs at least 2 repetitions");
  std::vector<EvalReport> runs;
  for (std::size_t r = 0; r < n; ++r) {
    TrainParams p = params;
    p.seed = params.seed + r;
    runs.push_back(evaluate(train(train_set, classes.size(), p).model, eval_set, classes));
  }
  return aggregate(runs);
}

// ---------------------------------------------------------------------------
// Baseline

/// Simulates a predictor that ignores its input and draws labels from the
/// class distribution. The evaluation set is the distribution itself
/// (counts[k] instances of class k); the report aggregates `trials` draws.
inline EvalReport weighted_random_baseline(const std::vector<std::pair<std::string, std::size_t>>& counts,
                                           std::size_t trials, std::uint64_t seed) {
  if (trials < 1) throw std::invalid_argument("baseline needs at least one trial");
  std::vector<std::string> classes;
  std::vector<std::size_t> truth;
  std::vector<double> cumulative;
  double total = 0;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    classes.push_back(counts[k].first);
    truth.insert(truth.end(), counts[k].second, k);
    total += static_cast<double>(counts[k].second);
    cumulative.push_back(total);
  }
  if (truth.empty()) throw std::invalid_argument("baseline over an empty distribution");
  for (auto& c : cumulative) c /= total;
  std::mt19937_64 rng(seed);
  std::vector<EvalReport> runs;
  std::vector<std::size_t> pred(truth.size());
  for (std::size_t t = 0; t < trials; ++t) {
    for (auto& p : pred) {
      const double u = io::uniform_unit(rng);
      p = static_cast<std::size_t>(std::upper_bound(cumulative.begin(), cumulative.end(), u) - cumulative.begin());
      p = std::min(p, classes.size() - 1);
    }
    runs.push_back(evaluate_predictions(truth, pred, classes));
  }
  if (trials == 1) return runs.front();
  return aggregate(runs);
}

/// Expected per-class precision and recall of the weighted random predictor
/// are both p(c), so its expected macro F1 is the mean of p(c) over classes.
inline double analytic_weighted_random_macro_f1(const std::vector<std::pair<std::string, std::size_t>>& counts) {
  double total = 0;
  for (const auto& [name, n] : counts) total += static_cast<double>(n);
  if (counts.empty() || total == 0) return 0;
  double s = 0;
  for (const auto& [name, n] : counts) s += static_cast<double>(n) / total;
  return s / static_cast<double>(counts.size());
}

// ---------------------------------------------------------------------------
// Reports

inline nlohmann::ordered_json to_json(const EvalReport& r) {
  nlohmann::ordered_json j;
  j["classes"] = r.classes;
  j["repetitions"] = r.repetitions;
  j["macro_f1"] = r.macro_f1;
  j["micro_f1"] = r.micro_f1;
  auto per_class = nlohmann::ordered_json::object();
  for (std::size_t k = 0; k < r.classes.size(); ++k) {
    nlohmann::ordered_json c;
    c["f1"] = r.per_class_f1[k];
    c["precision"] = r.precision[k];
    c["recall"] = r.recall[k];
    c["support"] = r.support[k];
    per_class[r.classes[k]] = c;
  }
  j["per_class"] = per_class;
  j["confusion"] = r.confusion;
  auto ci = nlohmann::ordered_json::object();
  for (const auto& [name, lohi] : r.ci95) ci[name] = {lohi.first, lohi.second};
  j["ci95"] = ci;
  j["conventions"] = {{"f1", kF1Convention}, {"ci95", kCiConvention}};
  return j;
}

inline std::string confusion_csv(const EvalReport& r) {
  std::string out = "true\\predicted";
  for (const auto& c : r.classes) out += "," + io::csv_field(c);
  out += "\n";
  for (std::size_t i = 0; i < r.classes.size(); ++i) {
    out += io::csv_field(r.classes[i]);
    for (std::size_t j = 0; j < r.classes.size(); ++j) out += "," + std::to_string(r.confusion[i][j]);
    out += "\n";
  }
  return out;
}

/// F1 table in percent: macro, micro, then one column per class, as
/// "mean ± half-width" when the report aggregates repetitions.
inline std::string f1_markdown(const EvalReport& model, const EvalReport& baseline) {
  auto cell = [](const EvalReport& r, const std::string& metric, double v) {
    std::string s = io::fixed(100 * v, 1);
    if (auto it = r.ci95.find(metric); it != r.ci95.end() && r.repetitions > 1)
      s += " ± " + io::fixed(100 * (it->second.second - it->second.first) / 2, 1);
    return s;
  };
  std::string out = "| | M | μ |";
  for (const auto& c : model.classes) out += " *" + c + "* |";
  out += "\n|---|---:|---:|";
  for (std::size_t k = 0; k < model.classes.size(); ++k) out += "---:|";
  out += "\n";
  auto row = [&](const std::string& name, const EvalReport& r) {
    std::string s = "| " + name + " | " + cell(r, "macro_f1", r.macro_f1) + " | " + cell(r, "micro_f1", r.micro_f1) + " |";
    for (std::size_t k = 0; k < r.classes.size(); ++k) s += " " + cell(r, "f1:" + r.classes[k], r.per_class_f1[k]) + " |";
    return s + "\n";
  };
  out += row("linear head (" + std::to_string(model.repetitions) + " runs)", model);
  out += row("weighted random (" + std::to_string(baseline.repetitions) + " trials)", baseline);
  out += "\nF1 in percent; ";
  out += kCiConvention;
  out += ". ";
  out += kF1Convention;
  out += ".\n";
  return out;
}

}  // namespace nounclass::classifier

#endif  // NOUNCLASS_CLASSIFIER_HPP_
