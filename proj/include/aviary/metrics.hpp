#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numeric>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "aviary/forest.hpp"
#include "aviary/rng.hpp"
#include "aviary/types.hpp"

namespace aviary {

// Stratified k-fold cross-validation with pooled metrics: per-class
// precision, recall, F-measure and one-vs-rest AUC over the union of all
// held-out predictions.

using ConfusionMatrix =
    std::array<std::array<std::uint32_t, kNumClasses>, kNumClasses>;

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f_measure = 0.0;
  std::optional<double> auc;  // undefined without both positives and negatives
  std::uint32_t support = 0;
};

struct PooledPrediction {
  int index = 0;  // position in the input dataset
  UserClass truth = UserClass::Personal;
  UserClass predicted = UserClass::Personal;
  std::array<double, kNumClasses> scores{};
};

struct EvaluationReport {
  ConfusionMatrix confusion{};
  std::array<ClassMetrics, kNumClasses> per_class{};
  std::vector<PooledPrediction> predictions;
  TrainConfig config;
  int k = 0;
  std::uint64_t seed = 0;
  double accuracy = 0.0;
};

// Per class: shuffle that class's indices with the pinned generator, then
// deal round-robin starting at fold (class_index mod k). Per-class fold
// counts differ by at most one.
inline std::vector<int> stratified_folds(const std::vector<UserClass>& labels,
                                         int k, std::uint64_t seed) {
  if (k < 2) throw ConfigError("k must be >= 2");
  if (static_cast<std::size_t>(k) > labels.size())
    throw ConfigError("k exceeds the number of records");
  std::vector<int> fold(labels.size(), -1);
  for (int c = 0; c < kNumClasses; ++c) {
    std::vector<int> members;
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (static_cast<int>(labels[i]) == c) members.push_back(static_cast<int>(i));
    if (members.empty()) continue;  // empty stratum is allowed
    Rng rng = Rng::stream(seed, rng_streams::kFoldTag +
                                    static_cast<std::uint64_t>(c));
    rng.shuffle(members);
    for (std::size_t i = 0; i < members.size(); ++i)
      fold[static_cast<std::size_t>(members[i])] =
          (c + static_cast<int>(i)) % k;
  }
  return fold;
}

// precision = TP/(TP+FP), recall = TP/(TP+FN), F = 2PR/(P+R); empty
// denominators give 0.
inline std::array<double, 3> precision_recall_f(const ConfusionMatrix& m,
                                                int class_index) {
  const auto c = static_cast<std::size_t>(class_index);
  double tp = m[c][c];
  double col = 0.0, row = 0.0;
  for (std::size_t r = 0; r < kNumClasses; ++r) col += m[r][c];
  for (std::size_t j = 0; j < kNumClasses; ++j) row += m[c][j];
  const double precision = col > 0.0 ? tp / col : 0.0;
  const double recall = row > 0.0 ? tp / row : 0.0;
  const double f = precision + recall > 0.0
                       ? 2.0 * precision * recall / (precision + recall)
                       : 0.0;
  return {precision, recall, f};
}

// Mann-Whitney AUC with mid-rank tie correction:
// AUC = (R_pos - P(P+1)/2) / (P * N), R_pos the sum of positive mid-ranks.
inline double auc_one_vs_rest(const std::vector<double>& scores,
                              const std::vector<bool>& is_positive) {
  if (scores.size() != is_positive.size())
    throw InvalidInputError("scores/labels size mismatch");
  const std::size_t n = scores.size();
  std::size_t positives = 0;
  for (bool b : is_positive) positives += b ? 1 : 0;
  if (positives == 0 || positives == n)
    throw UndefinedAucError("AUC needs at least one positive and one negative");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] < scores[b];
  });

  double rank_sum_pos = 0.0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double mid_rank = (static_cast<double>(i + 1) +
                             static_cast<double>(j + 1)) / 2.0;
    for (std::size_t t = i; t <= j; ++t)
      if (is_positive[order[t]]) rank_sum_pos += mid_rank;
    i = j + 1;
  }
  const auto p = static_cast<double>(positives);
  const auto neg = static_cast<double>(n - positives);
  return (rank_sum_pos - p * (p + 1.0) / 2.0) / (p * neg);
}

namespace detail_metrics {

inline void fill_report_metrics(EvaluationReport& report) {
  std::uint64_t correct = 0, total = 0;
  for (int c = 0; c < kNumClasses; ++c) {
    const auto cc = static_cast<std::size_t>(c);
    const auto prf = precision_recall_f(report.confusion, c);
    auto& m = report.per_class[cc];
    m.precision = prf[0];
    m.recall = prf[1];
    m.f_measure = prf[2];
    m.support = 0;
    for (std::size_t j = 0; j < kNumClasses; ++j)
      m.support += report.confusion[cc][j];
    correct += report.confusion[cc][cc];

    std::vector<double> scores;
    std::vector<bool> is_positive;
    scores.reserve(report.predictions.size());
    is_positive.reserve(report.predictions.size());
    for (const auto& pred : report.predictions) {
      scores.push_back(pred.scores[cc]);
      is_positive.push_back(pred.truth == static_cast<UserClass>(c));
    }
    try {
      m.auc = auc_one_vs_rest(scores, is_positive);
    } catch (const UndefinedAucError&) {
      m.auc = std::nullopt;
    }
  }
  for (const auto& row : report.confusion)
    for (auto v : row) total += v;
  report.accuracy =
      total > 0 ? static_cast<double>(correct) / static_cast<double>(total)
                : 0.0;
}

}  // namespace detail_metrics

// For each fold: train on the other k-1 folds (normalization refit inside
// train_forest, so nothing leaks from held-out data), score the fold, pool
// everything, then compute the confusion matrix and per-class metrics.
inline EvaluationReport cross_validate(const std::vector<FeatureVector>& x,
                                       const std::vector<UserClass>& y,
                                       const TrainConfig& config, int k,
                                       std::uint64_t seed, int threads = 0) {
  if (x.size() != y.size())
    throw InvalidInputError("feature/label size mismatch");
  const std::vector<int> fold = stratified_folds(y, k, seed);

  std::vector<std::size_t> fold_sizes(static_cast<std::size_t>(k), 0);
  for (int f : fold) ++fold_sizes[static_cast<std::size_t>(f)];
  for (int f = 0; f < k; ++f)
    if (fold_sizes[static_cast<std::size_t>(f)] == 0)
      throw EvaluationError("fold " + std::to_string(f) + " is empty");

  EvaluationReport report;
  report.config = config;
  report.k = k;
  report.seed = seed;
  report.predictions.resize(x.size());

  parallel_for(static_cast<std::size_t>(k), threads, [&](std::size_t f) {
    std::vector<FeatureVector> train_x;
    std::vector<UserClass> train_y;
    std::vector<int> test_idx;
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (fold[i] == static_cast<int>(f)) {
        test_idx.push_back(static_cast<int>(i));
      } else {
        train_x.push_back(x[i]);
        train_y.push_back(y[i]);
      }
    }
    RandomForestModel model;
    try {
      // Per-fold training is already inside a parallel region.
      model = train_forest(train_x, train_y, config, 1);
    } catch (const DegenerateDatasetError& e) {
      throw DegenerateDatasetError("fold " + std::to_string(f) + ": " +
                                   e.what());
    }
    for (int i : test_idx) {
      const auto idx = static_cast<std::size_t>(i);
      PooledPrediction& out = report.predictions[idx];
      out.index = i;
      out.truth = y[idx];
      out.scores = predict_proba(model, x[idx]);
      out.predicted = argmax_class(out.scores);
    }
  });

  for (const auto& pred : report.predictions)
    ++report.confusion[static_cast<std::size_t>(pred.truth)]
                      [static_cast<std::size_t>(pred.predicted)];
  detail_metrics::fill_report_metrics(report);
  return report;
}

// --- report output -------------------------------------------------------------

inline nlohmann::json report_to_json(const EvaluationReport& report) {
  nlohmann::json classes = nlohmann::json::array();
  for (int c = 0; c < kNumClasses; ++c) {
    const auto& m = report.per_class[static_cast<std::size_t>(c)];
    nlohmann::json row{{"class", kClassNames[static_cast<std::size_t>(c)]},
                       {"precision", m.precision},
                       {"recall", m.recall},
                       {"f_measure", m.f_measure},
                       {"support", m.support}};
    if (m.auc)
      row["auc"] = *m.auc;
    else
      row["auc"] = nullptr;
    classes.push_back(std::move(row));
  }
  return nlohmann::json{{"k", report.k},
                        {"seed", report.seed},
                        {"config", config_to_json(report.config)},
                        {"dataset_size", report.predictions.size()},
                        {"accuracy", report.accuracy},
                        {"confusion", report.confusion},
                        {"classes", std::move(classes)}};
}

// Per-class CSV, one row per class: Class,Precision,Recall,F-Measure,AUC.
inline void write_report_csv(std::ostream& os,
                             const EvaluationReport& report) {
  os << "Class,Precision,Recall,F-Measure,AUC\n";
  char buf[64];
  for (int c = 0; c < kNumClasses; ++c) {
    const auto& m = report.per_class[static_cast<std::size_t>(c)];
    os << kClassNames[static_cast<std::size_t>(c)];
    std::snprintf(buf, sizeof(buf), ",%.6f,%.6f,%.6f", m.precision, m.recall,
                  m.f_measure);
    os << buf;
    if (m.auc) {
      std::snprintf(buf, sizeof(buf), ",%.6f", *m.auc);
      os << buf;
    } else {
      os << ",NA";
    }
    os << '\n';
  }
}

}  // namespace aviary
