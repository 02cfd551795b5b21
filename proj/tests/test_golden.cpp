#include <doctest.h>

#include <fstream>
#include <sstream>
#include <string>

#include "aviary/forest.hpp"
#include "aviary/ingest.hpp"
#include "aviary/metrics.hpp"
#include "aviary/synth.hpp"

// Frozen end-to-end artifacts. These files were produced once by the CLI and
// committed; the checks here recompute them in-process so any change to the
// RNG, the feature formulas, the tree learner, or the serializers shows up as
// a byte-level diff.

using namespace aviary;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

const std::string kGoldenDir = std::string(AVIARY_TEST_DATA_DIR) + "/golden";

SynthConfig fixture_config() {
  SynthConfig config;
  config.total_users = 60;
  config.class_counts = {10, 10, 10, 10, 10, 10};
  config.seed = 7;
  return config;
}

}  // namespace

TEST_CASE("fixture corpus bytes are stable") {
  CHECK(generate_corpus(fixture_config()) ==
        slurp(kGoldenDir + "/fixture_corpus.jsonl"));
}

TEST_CASE("fixture model and its predictions are stable") {
  std::istringstream in(slurp(kGoldenDir + "/fixture_corpus.jsonl"));
  const auto parsed = parse_dataset(in);
  REQUIRE(parsed.records.size() == 60);

  std::vector<FeatureVector> x;
  std::vector<UserClass> y;
  for (const auto& rec : parsed.records) {
    x.push_back(extract_features(rec));
    y.push_back(*rec.label);
  }
  TrainConfig config;
  config.n_trees = 20;
  config.seed = 42;
  const auto model = train_forest(x, y, config);
  CHECK(model_to_json(model).dump() + "\n" ==
        slurp(kGoldenDir + "/fixture_model.json"));

  std::ostringstream csv;
  csv << "user_id,predicted";
  for (const auto& name : model.class_order) csv << ",score_" << name;
  csv << '\n';
  for (std::size_t i = 0; i < parsed.records.size(); ++i) {
    const auto proba = predict_proba(model, x[i]);
    csv << parsed.records[i].profile.user_id << ','
        << to_string(argmax_class(proba));
    for (double p : proba) csv << ',' << format_significant(p, 12);
    csv << '\n';
  }
  CHECK(csv.str() == slurp(kGoldenDir + "/fixture_predictions.csv"));
}

TEST_CASE("fixture cross-validation report is stable") {
  std::istringstream in(slurp(kGoldenDir + "/fixture_corpus.jsonl"));
  const auto parsed = parse_dataset(in);
  std::vector<FeatureVector> x;
  std::vector<UserClass> y;
  for (const auto& rec : parsed.records) {
    x.push_back(extract_features(rec));
    y.push_back(*rec.label);
  }
  TrainConfig config;
  config.n_trees = 20;
  config.seed = 42;
  const auto report = cross_validate(x, y, config, 10, 42);
  CHECK(report_to_json(report).dump(2) + "\n" ==
        slurp(kGoldenDir + "/fixture_report.json"));
}
