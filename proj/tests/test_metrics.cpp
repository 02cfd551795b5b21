#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "aviary/ingest.hpp"
#include "aviary/metrics.hpp"
#include "aviary/synth.hpp"
#include "oracles.hpp"

using namespace aviary;

namespace {

// Table-4 style label mix: 19/399/157/49/51/41.
std::vector<UserClass> reference_mix() {
  const std::array<int, kNumClasses> counts{19, 399, 157, 49, 51, 41};
  std::vector<UserClass> labels;
  for (int c = 0; c < kNumClasses; ++c)
    for (int i = 0; i < counts[static_cast<std::size_t>(c)]; ++i)
      labels.push_back(static_cast<UserClass>(c));
  // Interleave so fold assignment cannot rely on input order.
  Rng rng(404);
  rng.shuffle(labels);
  return labels;
}

}  // namespace

TEST_CASE("fold assignment partitions the dataset") {
  const auto labels = reference_mix();
  const auto fold = stratified_folds(labels, 10, 11);
  REQUIRE(fold.size() == labels.size());
  for (int f : fold) {
    CHECK(f >= 0);
    CHECK(f < 10);
  }
}

TEST_CASE("per-class fold counts differ by at most one") {
  const auto labels = reference_mix();
  const auto fold = stratified_folds(labels, 10, 11);
  for (int c = 0; c < kNumClasses; ++c) {
    std::array<int, 10> counts{};
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (static_cast<int>(labels[i]) == c)
        ++counts[static_cast<std::size_t>(fold[i])];
    const auto [lo, hi] = std::minmax_element(counts.begin(), counts.end());
    CHECK(*hi - *lo <= 1);
  }
}

TEST_CASE("fold sizes on the reference mix stay within the class-count bound") {
  const auto labels = reference_mix();
  const auto fold = stratified_folds(labels, 10, 11);
  std::array<int, 10> sizes{};
  for (int f : fold) ++sizes[static_cast<std::size_t>(f)];
  const auto [lo, hi] = std::minmax_element(sizes.begin(), sizes.end());
  CHECK(*hi - *lo <= kNumClasses);
  // Round-robin with per-class start offsets lands every fold near 71.6.
  CHECK(*lo >= 70);
  CHECK(*hi <= 73);
  int total = 0;
  for (int s : sizes) total += s;
  CHECK(total == 716);
}

TEST_CASE("exact divisibility gives one member per class per fold") {
  std::vector<UserClass> labels;
  for (int i = 0; i < 10; ++i) labels.push_back(UserClass::Personal);
  for (int i = 0; i < 10; ++i) labels.push_back(UserClass::Spam);
  const auto fold = stratified_folds(labels, 10, 3);
  std::map<int, std::array<int, 2>> per_fold;
  for (std::size_t i = 0; i < labels.size(); ++i)
    ++per_fold[fold[i]][labels[i] == UserClass::Personal ? 0 : 1];
  REQUIRE(per_fold.size() == 10);
  for (const auto& [f, counts] : per_fold) {
    CHECK(counts[0] == 1);
    CHECK(counts[1] == 1);
  }
}

TEST_CASE("k=2 on a 20-record balanced mix gives two folds of 10") {
  std::vector<UserClass> labels;
  const std::array<int, kNumClasses> counts{4, 4, 3, 3, 3, 3};
  for (int c = 0; c < kNumClasses; ++c)
    for (int i = 0; i < counts[static_cast<std::size_t>(c)]; ++i)
      labels.push_back(static_cast<UserClass>(c));
  const auto fold = stratified_folds(labels, 2, 1);
  std::array<int, 2> sizes{};
  for (int f : fold) ++sizes[static_cast<std::size_t>(f)];
  CHECK(sizes[0] == 10);
  CHECK(sizes[1] == 10);
}

TEST_CASE("a 19-member class splits 2x9 + 1 across ten folds") {
  std::vector<UserClass> labels(19, UserClass::Personal);
  for (int i = 0; i < 81; ++i) labels.push_back(UserClass::Professional);
  const auto fold = stratified_folds(labels, 10, 7);
  std::array<int, 10> counts{};
  for (std::size_t i = 0; i < 19; ++i)
    ++counts[static_cast<std::size_t>(fold[i])];
  CHECK(std::count(counts.begin(), counts.end(), 2) == 9);
  CHECK(std::count(counts.begin(), counts.end(), 1) == 1);
}

TEST_CASE("fold assignment is deterministic in the seed") {
  const auto labels = reference_mix();
  CHECK(stratified_folds(labels, 10, 5) == stratified_folds(labels, 10, 5));
  CHECK(stratified_folds(labels, 10, 5) != stratified_folds(labels, 10, 6));
}

TEST_CASE("invalid k is rejected") {
  std::vector<UserClass> labels(5, UserClass::Spam);
  CHECK_THROWS_AS(stratified_folds(labels, 1, 0), ConfigError);
  CHECK_THROWS_AS(stratified_folds(labels, 6, 0), ConfigError);
}

TEST_CASE("precision/recall/F on a diagonal confusion") {
  ConfusionMatrix m{};
  for (int c = 0; c < kNumClasses; ++c)
    m[static_cast<std::size_t>(c)][static_cast<std::size_t>(c)] = 5;
  for (int c = 0; c < kNumClasses; ++c) {
    const auto [p, r, f] = precision_recall_f(m, c);
    CHECK(p == 1.0);
    CHECK(r == 1.0);
    CHECK(f == 1.0);
  }
}

TEST_CASE("a class never predicted scores zero without dividing by zero") {
  ConfusionMatrix m{};
  m[0][1] = 4;  // every Personal predicted as Professional
  const auto [p, r, f] = precision_recall_f(m, 0);
  CHECK(p == 0.0);
  CHECK(r == 0.0);
  CHECK(f == 0.0);
}

TEST_CASE("precision/recall/F arithmetic") {
  ConfusionMatrix m{};
  m[0][0] = 9;  // TP
  m[1][0] = 1;  // FP from class 1
  m[0][1] = 3;  // FN into class 1
  const auto [p, r, f] = precision_recall_f(m, 0);
  CHECK(p == doctest::Approx(0.9));
  CHECK(r == doctest::Approx(0.75));
  CHECK(f == doctest::Approx(2.0 * 0.9 * 0.75 / 1.65));
}

TEST_CASE("AUC: perfect separation and total ties") {
  CHECK(auc_one_vs_rest({1.0, 1.0, 0.0, 0.0}, {true, true, false, false}) ==
        1.0);
  CHECK(auc_one_vs_rest({0.4, 0.4, 0.4, 0.4}, {true, false, true, false}) ==
        0.5);
}

TEST_CASE("AUC requires both a positive and a negative") {
  CHECK_THROWS_AS(auc_one_vs_rest({0.1, 0.2}, {true, true}), UndefinedAucError);
  CHECK_THROWS_AS(auc_one_vs_rest({0.1, 0.2}, {false, false}),
                  UndefinedAucError);
}

TEST_CASE("rank-based AUC matches the quadratic oracle") {
  Rng rng(808);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + static_cast<int>(rng.below(199));
    std::vector<double> scores;
    std::vector<bool> labels;
    bool pos = false, neg = false;
    for (int i = 0; i < n; ++i) {
      // Quantized scores force plenty of ties.
      scores.push_back(static_cast<double>(rng.below(21)) / 20.0);
      labels.push_back(rng.bernoulli(0.4));
      pos |= labels.back();
      neg |= !labels.back();
    }
    if (!pos || !neg) continue;
    const auto expected = oracles::auc_oracle(scores, labels);
    REQUIRE(expected.has_value());
    CHECK(auc_one_vs_rest(scores, labels) ==
          doctest::Approx(*expected).epsilon(1e-12));
  }
}

TEST_CASE("AUC of negated scores complements (tie-free)") {
  Rng rng(909);
  std::vector<double> scores;
  std::vector<bool> labels;
  for (int i = 0; i < 101; ++i) {
    scores.push_back(rng.real() + i * 1e-9);  // distinct
    labels.push_back(i % 3 == 0);
  }
  std::vector<double> negated;
  for (double s : scores) negated.push_back(-s);
  CHECK(auc_one_vs_rest(scores, labels) + auc_one_vs_rest(negated, labels) ==
        doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("AUC is invariant under strictly increasing transforms") {
  Rng rng(1001);
  std::vector<double> scores;
  std::vector<bool> labels;
  for (int i = 0; i < 150; ++i) {
    scores.push_back(static_cast<double>(rng.below(11)) / 10.0);
    labels.push_back(rng.bernoulli(0.3));
  }
  labels[0] = true;
  labels[1] = false;
  const double base = auc_one_vs_rest(scores, labels);
  auto apply = [&](auto fn) {
    std::vector<double> mapped;
    for (double s : scores) mapped.push_back(fn(s));
    return auc_one_vs_rest(mapped, labels);
  };
  CHECK(apply([](double s) { return 3.0 * s + 7.0; }) ==
        doctest::Approx(base).epsilon(1e-12));
  CHECK(apply([](double s) { return std::exp(s); }) ==
        doctest::Approx(base).epsilon(1e-12));
  CHECK(apply([](double s) { return std::atan(s); }) ==
        doctest::Approx(base).epsilon(1e-12));
}

namespace {

// Small labeled dataset with class-dependent feature noise.
void toy_dataset(int per_class, double signal, std::uint64_t seed,
                 std::vector<FeatureVector>& x, std::vector<UserClass>& y) {
  Rng rng(seed);
  for (int c = 0; c < kNumClasses; ++c) {
    for (int i = 0; i < per_class; ++i) {
      FeatureVector v{};
      for (auto& e : v) e = rng.real();
      v[0] += signal * c;
      v[5] -= signal * c;
      x.push_back(v);
      y.push_back(static_cast<UserClass>(c));
    }
  }
}

}  // namespace

TEST_CASE("cross-validation on separable data is perfect") {
  std::vector<FeatureVector> x;
  std::vector<UserClass> y;
  toy_dataset(12, 10.0, 3, x, y);
  TrainConfig config;
  config.n_trees = 30;
  // Every split sees the informative feature, so the ensemble is exact.
  config.features_per_split = kNumFeatures;
  const auto report = cross_validate(x, y, config, 4, 9);
  for (int c = 0; c < kNumClasses; ++c) {
    const auto& m = report.per_class[static_cast<std::size_t>(c)];
    CHECK(m.precision == 1.0);
    CHECK(m.recall == 1.0);
    CHECK(m.f_measure == 1.0);
    REQUIRE(m.auc.has_value());
    CHECK(*m.auc == 1.0);
    CHECK(m.support == 12);
  }
  for (int c = 0; c < kNumClasses; ++c)
    for (int d = 0; d < kNumClasses; ++d)
      CHECK(report.confusion[static_cast<std::size_t>(c)]
                            [static_cast<std::size_t>(d)] ==
            (c == d ? 12u : 0u));
}

TEST_CASE("pure-noise labels score near chance AUC") {
  // Features independent of class, 6 balanced classes, n = 600. The seed is
  // fixed: it determines both the noise and the folds, so the result is a
  // deterministic draw from the null distribution.
  Rng rng(2);
  std::vector<FeatureVector> x;
  std::vector<UserClass> y;
  for (int c = 0; c < kNumClasses; ++c) {
    for (int i = 0; i < 100; ++i) {
      FeatureVector v{};
      for (auto& e : v) e = rng.real();
      x.push_back(v);
      y.push_back(static_cast<UserClass>(c));
    }
  }
  TrainConfig config;
  config.n_trees = 25;
  const auto report = cross_validate(x, y, config, 5, 2);
  for (const auto& m : report.per_class) {
    REQUIRE(m.auc.has_value());
    CHECK(*m.auc == doctest::Approx(0.5).epsilon(0.11));  // 0.5 +- 0.05 band
    CHECK(std::abs(*m.auc - 0.5) <= 0.05);
  }
}

TEST_CASE("pooled confusion total equals the dataset size; micro identity") {
  std::vector<FeatureVector> x;
  std::vector<UserClass> y;
  toy_dataset(9, 0.4, 5, x, y);  // weak signal: some confusion expected
  TrainConfig config;
  config.n_trees = 15;
  const auto report = cross_validate(x, y, config, 3, 17);
  std::uint64_t total = 0, diag = 0;
  double micro_tp = 0, micro_fp = 0, micro_fn = 0;
  for (int c = 0; c < kNumClasses; ++c) {
    const auto cc = static_cast<std::size_t>(c);
    for (std::size_t d = 0; d < kNumClasses; ++d) {
      total += report.confusion[cc][d];
      if (cc == d) {
        diag += report.confusion[cc][d];
        micro_tp += report.confusion[cc][d];
      } else {
        micro_fn += report.confusion[cc][d];
        micro_fp += report.confusion[d][cc];
      }
    }
  }
  CHECK(total == x.size());
  const double micro_p = micro_tp / (micro_tp + micro_fp);
  const double micro_r = micro_tp / (micro_tp + micro_fn);
  CHECK(micro_p == doctest::Approx(micro_r));
  CHECK(micro_p == doctest::Approx(report.accuracy));
  CHECK(report.accuracy ==
        doctest::Approx(static_cast<double>(diag) / static_cast<double>(total)));
}

TEST_CASE("cross-validation is deterministic end-to-end") {
  std::vector<FeatureVector> x;
  std::vector<UserClass> y;
  toy_dataset(8, 1.0, 7, x, y);
  TrainConfig config;
  config.n_trees = 10;
  const auto a = report_to_json(cross_validate(x, y, config, 4, 21, 1)).dump();
  const auto b = report_to_json(cross_validate(x, y, config, 4, 21, 8)).dump();
  CHECK(a == b);
}

TEST_CASE("single-class training fold fails naming the fold") {
  // One lone Professional: its fold's complement is single-class.
  std::vector<FeatureVector> x;
  std::vector<UserClass> y;
  Rng rng(12);
  for (int i = 0; i < 15; ++i) {
    FeatureVector v{};
    for (auto& e : v) e = rng.real();
    x.push_back(v);
    y.push_back(UserClass::Personal);
  }
  FeatureVector lone{};
  x.push_back(lone);
  y.push_back(UserClass::Professional);
  try {
    cross_validate(x, y, TrainConfig{}, 2, 5);
    FAIL("expected DegenerateDatasetError");
  } catch (const DegenerateDatasetError& e) {
    CHECK(std::string(e.what()).find("fold") != std::string::npos);
  }
}

TEST_CASE("an empty fold is an evaluation error") {
  // 6 + 6 across k=10: round-robin leaves folds 7..9 empty.
  std::vector<FeatureVector> x(12, FeatureVector{});
  std::vector<UserClass> y;
  for (int i = 0; i < 6; ++i) y.push_back(UserClass::Personal);
  for (int i = 0; i < 6; ++i) y.push_back(UserClass::Professional);
  for (std::size_t i = 0; i < x.size(); ++i) x[i][0] = static_cast<double>(i);
  CHECK_THROWS_AS(cross_validate(x, y, TrainConfig{}, 10, 5), EvaluationError);
}

TEST_CASE("AUC is flagged undefined for a class with no positives") {
  std::vector<FeatureVector> x;
  std::vector<UserClass> y;
  // Only two classes present; the other four must report undefined AUC.
  Rng rng(44);
  for (int i = 0; i < 20; ++i) {
    FeatureVector v{};
    for (auto& e : v) e = rng.real();
    v[0] += (i % 2) * 5.0;
    x.push_back(v);
    y.push_back(i % 2 ? UserClass::Business : UserClass::Spam);
  }
  const auto report = cross_validate(x, y, TrainConfig{}, 2, 5);
  CHECK(report.per_class[2].auc.has_value());
  CHECK(report.per_class[3].auc.has_value());
  CHECK_FALSE(report.per_class[0].auc.has_value());
  CHECK_FALSE(report.per_class[1].auc.has_value());
  CHECK_FALSE(report.per_class[4].auc.has_value());
  CHECK_FALSE(report.per_class[5].auc.has_value());

  // Undefined AUC serializes as null, not 0.
  const auto j = report_to_json(report);
  CHECK(j["classes"][0]["auc"].is_null());
  std::ostringstream csv;
  write_report_csv(csv, report);
  CHECK(csv.str().find("Personal,0.000000,0.000000,0.000000,NA") !=
        std::string::npos);
}

TEST_CASE("report JSON carries the confusion matrix and config echo") {
  std::vector<FeatureVector> x;
  std::vector<UserClass> y;
  toy_dataset(5, 5.0, 9, x, y);
  TrainConfig config;
  config.n_trees = 8;
  config.seed = 123;
  const auto report = cross_validate(x, y, config, 3, 55);
  const auto j = report_to_json(report);
  CHECK(j["k"] == 3);
  CHECK(j["seed"] == 55);
  CHECK(j["dataset_size"] == 30);
  CHECK(j["config"]["n_trees"] == 8);
  CHECK(j["config"]["seed"] == 123);
  CHECK(j["confusion"].size() == 6);
  CHECK(j["classes"].size() == 6);
}
