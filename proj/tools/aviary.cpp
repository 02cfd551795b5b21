// aviary: classify social-media accounts into six behavioral classes.
//
// Subcommands: synth, extract, train, evaluate, classify. Every command is
// deterministic given its flags; all randomness flows from --seed. Exit
// codes: 0 success, 1 I/O, 2 invalid input or config, 3 evaluation
// degeneracy, 4 model incompatibility.

#include <chrono>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "aviary/features.hpp"
#include "aviary/forest.hpp"
#include "aviary/ingest.hpp"
#include "aviary/metrics.hpp"
#include "aviary/synth.hpp"
#include "aviary/types.hpp"
#include "aviary/version.hpp"

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitIo = 1;
constexpr int kExitInvalid = 2;
constexpr int kExitEvaluation = 3;
constexpr int kExitModel = 4;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw aviary::IoError("cannot open " + path + " for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw aviary::IoError("I/O failure while reading " + path);
  return buf.str();
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw aviary::IoError("cannot open " + path + " for writing");
  out << contents;
  out.flush();
  if (!out) throw aviary::IoError("I/O failure while writing " + path);
}

aviary::ParseResult parse_corpus_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw aviary::IoError("cannot open " + path + " for reading");
  return aviary::parse_dataset(in);
}

// Flat JSON object keyed by long option names; keys that do not apply to the
// current command are ignored so one file can configure the whole pipeline.
json load_config_overrides(int argc, char** argv) {
  for (int i = 1; i + 1 < argc; ++i) {
    if (std::string(argv[i]) == "--config") {
      json parsed = json::parse(read_file(argv[i + 1]), nullptr, false);
      if (parsed.is_discarded() || !parsed.is_object())
        throw aviary::ConfigError("config file must be a JSON object");
      return parsed;
    }
  }
  return json::object();
}

class Manifest {
 public:
  Manifest(std::string command, std::uint64_t seed)
      : command_(std::move(command)),
        seed_(seed),
        start_(std::chrono::steady_clock::now()) {}

  void add_input(const std::string& path) { inputs_.push_back(path); }
  void add_output(const std::string& path) { outputs_.push_back(path); }
  void set_config(json config) { config_ = std::move(config); }

  // Written alongside the primary output as <output>.manifest.json.
  void write(const std::string& primary_output) const {
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                      start_)
            .count();
    const json manifest{{"command", command_},
                        {"config", config_},
                        {"inputs", inputs_},
                        {"outputs", outputs_},
                        {"seed", seed_},
                        {"tool_version", aviary::kVersion},
                        {"duration_seconds", seconds}};
    write_file(primary_output + ".manifest.json", manifest.dump(2) + "\n");
  }

 private:
  std::string command_;
  std::uint64_t seed_;
  json config_;
  std::vector<std::string> inputs_;
  std::vector<std::string> outputs_;
  std::chrono::steady_clock::time_point start_;
};

template <typename T>
void apply_override(const json& overrides, const char* key, T& value) {
  if (overrides.contains(key)) value = overrides.at(key).get<T>();
}

struct CommonForestFlags {
  aviary::TrainConfig config;
  int threads = 0;

  void add_to(CLI::App* cmd, const json& overrides) {
    apply_override(overrides, "trees", config.n_trees);
    apply_override(overrides, "max-depth", config.max_depth);
    apply_override(overrides, "min-split", config.min_samples_split);
    apply_override(overrides, "features-per-split", config.features_per_split);
    apply_override(overrides, "seed", config.seed);
    apply_override(overrides, "threads", threads);
    cmd->add_option("--trees", config.n_trees, "Number of trees");
    cmd->add_option("--max-depth", config.max_depth,
                    "Depth limit (0 = unlimited)");
    cmd->add_option("--min-split", config.min_samples_split,
                    "Minimum samples to split a node");
    cmd->add_option("--features-per-split", config.features_per_split,
                    "Features drawn per split");
    cmd->add_option("--seed", config.seed, "Random seed");
    cmd->add_option("--threads", threads, "Worker threads (0 = all cores)");
  }

  json echo() const {
    return json{{"trees", config.n_trees},
                {"max_depth", config.max_depth},
                {"min_samples_split", config.min_samples_split},
                {"features_per_split", config.features_per_split},
                {"threads", threads}};
  }
};

std::vector<aviary::FeatureVector> extract_all(
    const std::vector<aviary::UserRecord>& records,
    const aviary::FeatureOptions& options = {}) {
  std::vector<aviary::FeatureVector> out;
  out.reserve(records.size());
  for (const auto& rec : records)
    out.push_back(aviary::extract_features(rec, options));
  return out;
}

std::vector<aviary::UserClass> require_labels(
    const std::vector<aviary::UserRecord>& records) {
  std::vector<aviary::UserClass> labels;
  labels.reserve(records.size());
  std::vector<std::string> offenders;
  for (const auto& rec : records) {
    if (rec.label)
      labels.push_back(*rec.label);
    else if (offenders.size() < 10)
      offenders.push_back(rec.profile.user_id);
  }
  if (labels.size() != records.size()) {
    std::string msg = "unlabeled records: ";
    for (std::size_t i = 0; i < offenders.size(); ++i) {
      if (i) msg += ", ";
      msg += offenders[i];
    }
    if (records.size() - labels.size() > offenders.size()) msg += ", ...";
    throw aviary::InvalidInputError(msg);
  }
  return labels;
}

void report_rejects(const aviary::ParseResult& parsed) {
  if (!parsed.rejects.empty())
    std::cerr << "note: dropped " << parsed.rejects.size()
              << " invalid record(s)\n";
}

// --- subcommand bodies ------------------------------------------------------

int cmd_synth(const std::string& out_path, aviary::SynthConfig config,
              bool counts_given, const std::string& template_path) {
  if (!counts_given) config.class_counts = aviary::scale_class_counts(config.total_users);
  aviary::ClassTemplates templates = aviary::default_class_templates();
  Manifest manifest("synth", config.seed);
  if (!template_path.empty()) {
    templates = aviary::templates_from_json(json::parse(read_file(template_path)));
    manifest.add_input(template_path);
  }
  manifest.set_config(json{{"total", config.total_users},
                           {"counts", config.class_counts},
                           {"corrupt", config.corruption_count},
                           {"template", template_path}});
  write_file(out_path, aviary::generate_corpus(config, templates));
  manifest.add_output(out_path);
  manifest.write(out_path);
  return kExitOk;
}

int cmd_extract(const std::string& in_path, const std::string& out_path,
                std::string rejects_path, bool screen_name_promotion) {
  if (rejects_path.empty()) rejects_path = out_path + ".rejects.jsonl";
  Manifest manifest("extract", 0);
  manifest.add_input(in_path);
  manifest.set_config(json{{"screen-name-promotion", screen_name_promotion}});

  const aviary::ParseResult parsed = parse_corpus_file(in_path);
  aviary::FeatureOptions options;
  options.promotion_uses_screen_name = screen_name_promotion;
  const auto vectors = extract_all(parsed.records, options);

  std::ostringstream csv;
  aviary::write_feature_csv(csv, parsed.records, vectors);
  write_file(out_path, csv.str());
  std::ostringstream rejects;
  aviary::write_reject_report(rejects, parsed.rejects);
  write_file(rejects_path, rejects.str());

  manifest.add_output(out_path);
  manifest.add_output(rejects_path);
  manifest.write(out_path);
  return kExitOk;
}

int cmd_train(const std::string& in_path, const std::string& model_path,
              const CommonForestFlags& flags) {
  Manifest manifest("train", flags.config.seed);
  manifest.add_input(in_path);
  manifest.set_config(flags.echo());

  const aviary::ParseResult parsed = parse_corpus_file(in_path);
  report_rejects(parsed);
  const auto labels = require_labels(parsed.records);
  const auto vectors = extract_all(parsed.records);
  const aviary::RandomForestModel model =
      aviary::train_forest(vectors, labels, flags.config, flags.threads);
  write_file(model_path, aviary::model_to_json(model).dump() + "\n");

  manifest.add_output(model_path);
  manifest.write(model_path);
  return kExitOk;
}

int cmd_evaluate(const std::string& in_path, const std::string& report_path,
                 const std::string& csv_path, int k,
                 const CommonForestFlags& flags) {
  if (k < 2) throw aviary::ConfigError("k must be >= 2");
  Manifest manifest("evaluate", flags.config.seed);
  manifest.add_input(in_path);
  json config_echo = flags.echo();
  config_echo["k"] = k;
  manifest.set_config(config_echo);

  const aviary::ParseResult parsed = parse_corpus_file(in_path);
  report_rejects(parsed);
  const auto labels = require_labels(parsed.records);
  const auto vectors = extract_all(parsed.records);

  aviary::EvaluationReport report;
  try {
    report = aviary::cross_validate(vectors, labels, flags.config, k,
                                    flags.config.seed, flags.threads);
  } catch (const aviary::DegenerateDatasetError& e) {
    throw aviary::EvaluationError(e.what());
  }
  write_file(report_path, aviary::report_to_json(report).dump(2) + "\n");
  manifest.add_output(report_path);
  if (!csv_path.empty()) {
    std::ostringstream csv;
    aviary::write_report_csv(csv, report);
    write_file(csv_path, csv.str());
    manifest.add_output(csv_path);
  }
  manifest.write(report_path);
  return kExitOk;
}

int cmd_classify(const std::string& in_path, const std::string& model_path,
                 const std::string& out_path) {
  Manifest manifest("classify", 0);
  manifest.add_input(in_path);
  manifest.add_input(model_path);
  manifest.set_config(json::object());

  json model_json = json::parse(read_file(model_path), nullptr, false);
  if (model_json.is_discarded())
    throw aviary::ModelFormatError("model file is not valid JSON");
  const aviary::RandomForestModel model = aviary::model_from_json(model_json);

  const aviary::ParseResult parsed = parse_corpus_file(in_path);
  report_rejects(parsed);
  const auto vectors = extract_all(parsed.records);

  std::ostringstream csv;
  csv << "user_id,predicted";
  for (const auto& name : model.class_order) csv << ",score_" << name;
  csv << '\n';
  for (std::size_t i = 0; i < parsed.records.size(); ++i) {
    const auto proba = aviary::predict_proba(model, vectors[i]);
    csv << aviary::csv_escape(parsed.records[i].profile.user_id) << ','
        << aviary::to_string(aviary::argmax_class(proba));
    for (double p : proba) csv << ',' << aviary::format_significant(p, 12);
    csv << '\n';
  }
  write_file(out_path, csv.str());
  manifest.add_output(out_path);
  manifest.write(out_path);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Behavioral classification of social-media accounts"};
  app.set_version_flag("--version", aviary::kVersion);
  app.require_subcommand(1);

  json overrides;
  try {
    overrides = load_config_overrides(argc, argv);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInvalid;
  }
  std::string config_path;
  app.add_option("--config", config_path,
                 "JSON file of default option values")
      ->expected(1);

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a labeled corpus");
  std::string synth_out = "corpus.jsonl";
  aviary::SynthConfig synth_config;
  std::vector<int> synth_counts;
  std::string synth_template;
  apply_override(overrides, "out", synth_out);
  apply_override(overrides, "seed", synth_config.seed);
  apply_override(overrides, "total", synth_config.total_users);
  apply_override(overrides, "corrupt", synth_config.corruption_count);
  apply_override(overrides, "template", synth_template);
  synth->add_option("--out", synth_out, "Output JSONL path");
  synth->add_option("--seed", synth_config.seed, "Random seed");
  synth->add_option("--total", synth_config.total_users, "Total valid users");
  synth->add_option("--counts", synth_counts,
                    "Six per-class counts c0,..,c5 (sum = total)")
      ->delimiter(',')
      ->expected(0, 6);
  synth->add_option("--corrupt", synth_config.corruption_count,
                    "Invalid records to interleave");
  synth->add_option("--template", synth_template, "Class template JSON file");

  // extract
  auto* extract = app.add_subcommand("extract", "Extract feature CSV");
  std::string extract_in, extract_out, extract_rejects;
  bool screen_name_promotion = false;
  apply_override(overrides, "rejects", extract_rejects);
  apply_override(overrides, "screen-name-promotion", screen_name_promotion);
  extract->add_option("--in", extract_in, "Input corpus JSONL")->required();
  extract->add_option("--out", extract_out, "Output CSV path")->required();
  extract->add_option("--rejects", extract_rejects,
                      "Reject report path (default <out>.rejects.jsonl)");
  extract->add_flag("--screen-name-promotion", screen_name_promotion,
                    "Compare the website URL against screen_name instead of "
                    "display_name");

  // train
  auto* train = app.add_subcommand("train", "Train a random-forest model");
  std::string train_in, train_model;
  CommonForestFlags train_flags;
  train->add_option("--in", train_in, "Labeled corpus JSONL")->required();
  train->add_option("--model", train_model, "Output model path")->required();
  train_flags.add_to(train, overrides);

  // evaluate
  auto* evaluate =
      app.add_subcommand("evaluate", "Stratified k-fold cross-validation");
  std::string eval_in, eval_report, eval_csv;
  int eval_k = 10;
  CommonForestFlags eval_flags;
  apply_override(overrides, "k", eval_k);
  apply_override(overrides, "csv", eval_csv);
  evaluate->add_option("--in", eval_in, "Labeled corpus JSONL")->required();
  evaluate->add_option("--report", eval_report, "Output report JSON")
      ->required();
  evaluate->add_option("--csv", eval_csv, "Optional per-class CSV");
  evaluate->add_option("--k", eval_k, "Number of folds");
  eval_flags.add_to(evaluate, overrides);

  // classify
  auto* classify = app.add_subcommand("classify", "Score a corpus");
  std::string cls_in, cls_model, cls_out;
  classify->add_option("--in", cls_in, "Input corpus JSONL")->required();
  classify->add_option("--model", cls_model, "Trained model JSON")->required();
  classify->add_option("--out", cls_out, "Output prediction CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInvalid;
  }

  try {
    if (synth->parsed()) {
      if (!synth_counts.empty()) {
        if (synth_counts.size() != static_cast<std::size_t>(aviary::kNumClasses))
          throw aviary::ConfigError("--counts needs exactly 6 values");
        std::copy(synth_counts.begin(), synth_counts.end(),
                  synth_config.class_counts.begin());
      }
      return cmd_synth(synth_out, synth_config, !synth_counts.empty(),
                       synth_template);
    }
    if (extract->parsed())
      return cmd_extract(extract_in, extract_out, extract_rejects,
                         screen_name_promotion);
    if (train->parsed()) return cmd_train(train_in, train_model, train_flags);
    if (evaluate->parsed())
      return cmd_evaluate(eval_in, eval_report, eval_csv, eval_k, eval_flags);
    if (classify->parsed()) return cmd_classify(cls_in, cls_model, cls_out);
  } catch (const aviary::IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const aviary::EvaluationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitEvaluation;
  } catch (const aviary::ModelFormatError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitModel;
  } catch (const std::exception& e) {
    // ConfigError, InvalidInputError, DegenerateDatasetError and anything
    // else about the input all mean the same thing to a caller.
    std::cerr << "error: " << e.what() << '\n';
    return kExitInvalid;
  }
  return kExitOk;
}
