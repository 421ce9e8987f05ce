// cmstress command line: corpus stats, training, evaluation, prediction,
// experiment runs and synthetic corpus generation.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cmstress/corpus.hpp"
#include "cmstress/errors.hpp"
#include "cmstress/features.hpp"
#include "cmstress/forest.hpp"
#include "cmstress/metrics.hpp"
#include "cmstress/model_io.hpp"
#include "cmstress/runner.hpp"
#include "cmstress/synth.hpp"
#include "cmstress/version.hpp"

namespace {

using namespace cmstress;

ForestParams make_forest_params(std::uint32_t trees, std::int64_t max_depth,
                                std::uint32_t min_samples_split,
                                const std::string& features_per_split, bool bootstrap,
                                std::uint64_t seed) {
  ForestParams params;
  params.n_trees = trees;
  if (max_depth >= 0) params.max_depth = static_cast<std::uint32_t>(max_depth);
  params.min_samples_split = min_samples_split;
  if (features_per_split == "sqrt") {
    params.feature_rule = FeatureRule::kSqrt;
  } else if (features_per_split == "all") {
    params.feature_rule = FeatureRule::kAll;
  } else {
    try {
      params.feature_rule = FeatureRule::kFixed;
      params.fixed_features = static_cast<std::uint32_t>(std::stoul(features_per_split));
    } catch (const std::exception&) {
      throw InvalidParamsError("--features-per-split must be sqrt, all, or a positive integer");
    }
  }
  params.bootstrap = bootstrap;
  params.seed = seed;
  return params;
}

nlohmann::json parse_json_file(const std::string& path, const char* what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingFileError(std::string("cannot open ") + what + " file " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string(what) + " file " + path + " is not valid JSON: " + e.what());
  }
}

void run_stats(const std::string& data_path, const CsvColumns& columns,
               const std::string& split, bool as_json) {
  const LabeledCorpus corpus = load_corpus(data_path, split, columns);
  const ClassDistribution dist = corpus_stats(corpus);
  if (as_json) {
    nlohmann::json out = nlohmann::json::array();
    for (Label label : kAllLabels) {
      out.push_back({{"label", to_string(label)},
                     {"split", split},
                     {"count", dist.counts[label_index(label)]},
                     {"total", dist.total}});
    }
    std::cout << out.dump(2) << "\n";
    return;
  }
  std::printf("Split: %s (%s)\n", split.c_str(), data_path.c_str());
  std::printf("%-16s %8s\n", "Label", "Count");
  for (Label label : kAllLabels) {
    std::printf("%-16s %8llu\n", std::string(to_string(label)).c_str(),
                static_cast<unsigned long long>(dist.counts[label_index(label)]));
  }
  std::printf("%-16s %8llu\n", "Total", static_cast<unsigned long long>(dist.total));
  const double ratio = dist.imbalance_ratio();
  if (std::isinf(ratio)) {
    std::printf("%-16s %8s\n", "Imbalance ratio", "inf");
  } else {
    std::printf("%-16s %8.3f\n", "Imbalance ratio", ratio);
  }
}

void run_train(const std::string& train_path, const CsvColumns& columns,
               const AnalyzerConfig& analyzer, WeightingScheme weighting,
               const ForestParams& params, unsigned threads, const std::string& model_out) {
  const LabeledCorpus train = load_corpus(train_path, "train", columns);
  const Vocabulary vocab = fit_vocabulary(train, analyzer);
  const auto x = transform_corpus(train, vocab, weighting);
  const auto y = corpus_labels(train);
  Forest forest = train_forest(x, y, params, threads);
  forest.vocab_fingerprint = vocab.fingerprint();
  save_model(forest, vocab, weighting, model_out);
  std::printf("trained %u trees on %zu documents (vocabulary %u terms)\n", params.n_trees,
              train.size(), vocab.dim());
  std::printf("model written to %s\n", model_out.c_str());
}

void run_eval(const std::string& model_path, const std::string& data_path,
              const CsvColumns& columns, const std::string& format) {
  const RenderStyle style = render_style_from_string(format);
  const LoadedModel model = load_model(model_path);
  const LabeledCorpus data = load_corpus(data_path, "eval", columns);
  std::vector<Label> predicted;
  predicted.reserve(data.size());
  for (const auto& doc : data.docs) {
    predicted.push_back(
        predict_forest(model.forest, vectorize(doc.text, model.vocab, model.weighting)).label);
  }
  const MetricsReport report = compute_metrics(confusion(corpus_labels(data), predicted));
  std::cout << render_metrics(report, style);
}

void run_predict(const std::string& model_path, const std::optional<std::string>& input_path,
                 const std::optional<std::string>& inline_text, const std::string& text_col,
                 const std::optional<std::string>& out_path, const std::string& format) {
  if (format != "csv" && format != "jsonl") {
    throw InvalidParamsError("--format must be csv or jsonl");
  }
  const LoadedModel model = load_model(model_path);
  std::vector<std::string> texts;
  if (inline_text) {
    texts.push_back(*inline_text);
  } else {
    texts = load_texts(*input_path, text_col);
  }
  const std::vector<Prediction> predictions = predict_texts(model, texts);

  std::ofstream file_out;
  if (out_path) {
    file_out.open(*out_path, std::ios::binary);
    if (!file_out) throw IoError("cannot open " + *out_path + " for writing");
  }
  std::ostream& out = out_path ? file_out : std::cout;
  if (!predictions.empty()) {
    if (format == "csv") {
      write_predictions_csv(out, predictions);
    } else {
      write_predictions_jsonl(out, predictions);
    }
  }
  out.flush();
  if (out_path && !file_out) throw IoError("failed writing " + *out_path);
}

void run_experiment_cmd(const std::string& config_path, const std::optional<std::string>& out_dir,
                        std::optional<unsigned> threads) {
  const nlohmann::json j = parse_json_file(config_path, "config");
  ExperimentConfig config = experiment_config_from_json(j);
  if (out_dir) config.output_dir = *out_dir;
  if (threads) config.n_threads = *threads;
  if (config.output_dir.empty()) {
    throw DataError("no output directory: set output_dir in the config or pass --out");
  }
  const ExperimentReport report = run_experiment(config);
  for (const auto& cell : report.cells) {
    std::printf("cell %s/%s: validation macro F1 %s\n", cell.language_tag.c_str(),
                cell.slug.c_str(), format_3dp(cell.validation.macro.f1).c_str());
  }
  for (const auto& b : select_best(report, "macro_f1")) {
    std::printf("best for %s: %s (macro_f1 %s)\n", b.language_tag.c_str(), b.slug.c_str(),
                format_3dp(b.value).c_str());
  }
  std::printf("report written to %s\n", config.output_dir.c_str());
}

void run_synth(const std::string& spec_path, const std::string& out_path) {
  const nlohmann::json j = parse_json_file(spec_path, "spec");
  const SynthSpec spec = synth_spec_from_json(j);
  const LabeledCorpus corpus = generate_synthetic(spec);
  write_corpus(corpus, out_path);
  const ClassDistribution dist = corpus_stats(corpus);
  std::printf("wrote %llu documents (%llu \"%s\", %llu \"%s\") to %s\n",
              static_cast<unsigned long long>(dist.total),
              static_cast<unsigned long long>(dist.counts[0]),
              std::string(kLabelNames[0]).c_str(),
              static_cast<unsigned long long>(dist.counts[1]),
              std::string(kLabelNames[1]).c_str(), out_path.c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stress detection on code-mixed text: random forests over "
               "TF-IDF / n-gram features"};
  app.set_version_flag("--version", std::string(cmstress::kArtifactVersion));
  app.require_subcommand(1);

  // stats
  std::string stats_data;
  CsvColumns stats_columns;
  std::string stats_split = "data";
  bool stats_json = false;
  auto* stats_cmd = app.add_subcommand("stats", "class distribution of a corpus CSV");
  stats_cmd->add_option("--data", stats_data, "corpus CSV path")->required();
  stats_cmd->add_option("--text-col", stats_columns.text, "text column name");
  stats_cmd->add_option("--label-col", stats_columns.label, "label column name");
  stats_cmd->add_option("--split", stats_split, "split name for the report");
  stats_cmd->add_flag("--json", stats_json, "emit machine-readable JSON");
  stats_cmd->callback([&] { run_stats(stats_data, stats_columns, stats_split, stats_json); });

  // train
  std::string train_path;
  CsvColumns train_columns;
  std::string train_analyzer = "word";
  std::uint32_t train_ngram_min = 1;
  std::uint32_t train_ngram_max = 1;
  bool train_no_lowercase = false;
  std::string train_weighting = "tfidf";
  std::uint32_t train_trees = 100;
  std::int64_t train_max_depth = -1;
  std::uint32_t train_min_split = 2;
  std::string train_fps = "sqrt";
  bool train_no_bootstrap = false;
  std::uint64_t train_seed = 0;
  unsigned train_threads = 1;
  std::string train_model_out;
  auto* train_cmd = app.add_subcommand("train", "train a random forest classifier");
  train_cmd->add_option("--train", train_path, "training corpus CSV")->required();
  train_cmd->add_option("--text-col", train_columns.text, "text column name");
  train_cmd->add_option("--label-col", train_columns.label, "label column name");
  train_cmd->add_option("--analyzer", train_analyzer, "word or char")
      ->check(CLI::IsMember({"word", "char"}));
  train_cmd->add_option("--ngram-min", train_ngram_min, "smallest n-gram length");
  train_cmd->add_option("--ngram-max", train_ngram_max, "largest n-gram length");
  train_cmd->add_flag("--no-lowercase", train_no_lowercase, "keep original casing");
  train_cmd->add_option("--weighting", train_weighting, "count or tfidf")
      ->check(CLI::IsMember({"count", "tfidf"}));
  train_cmd->add_option("--trees", train_trees, "number of trees");
  train_cmd->add_option("--max-depth", train_max_depth, "depth limit, -1 = unlimited");
  train_cmd->add_option("--min-samples-split", train_min_split, "minimum node size to split");
  train_cmd->add_option("--features-per-split", train_fps, "sqrt, all, or a fixed count");
  train_cmd->add_flag("--no-bootstrap", train_no_bootstrap, "train every tree on all samples");
  train_cmd->add_option("--seed", train_seed, "random seed");
  train_cmd->add_option("--threads", train_threads, "worker threads (speed only)");
  train_cmd->add_option("--model-out", train_model_out, "output model path")->required();
  train_cmd->callback([&] {
    AnalyzerConfig analyzer;
    analyzer.analyzer = analyzer_from_string(train_analyzer);
    analyzer.ngram_min = train_ngram_min;
    analyzer.ngram_max = train_ngram_max;
    analyzer.lowercase = !train_no_lowercase;
    validate(analyzer);
    const ForestParams params =
        make_forest_params(train_trees, train_max_depth, train_min_split, train_fps,
                           !train_no_bootstrap, train_seed);
    run_train(train_path, train_columns, analyzer, weighting_from_string(train_weighting),
              params, train_threads, train_model_out);
  });

  // eval
  std::string eval_model;
  std::string eval_data;
  CsvColumns eval_columns;
  std::string eval_format = "table3";
  auto* eval_cmd = app.add_subcommand("eval", "score a model against a labeled CSV");
  eval_cmd->add_option("--model", eval_model, "model file")->required();
  eval_cmd->add_option("--data", eval_data, "labeled corpus CSV")->required();
  eval_cmd->add_option("--text-col", eval_columns.text, "text column name");
  eval_cmd->add_option("--label-col", eval_columns.label, "label column name");
  eval_cmd->add_option("--format", eval_format, "table3, table4 or json")
      ->check(CLI::IsMember({"table3", "table4", "json"}));
  eval_cmd->callback([&] { run_eval(eval_model, eval_data, eval_columns, eval_format); });

  // predict
  std::string predict_model;
  std::string predict_input;
  std::string predict_text;
  std::string predict_text_col = "text";
  std::string predict_out;
  std::string predict_format = "csv";
  auto* predict_cmd = app.add_subcommand("predict", "label new texts with a trained model");
  predict_cmd->add_option("--model", predict_model, "model file")->required();
  auto* input_opt = predict_cmd->add_option("--input", predict_input, "CSV of texts");
  auto* text_opt = predict_cmd->add_option("--text", predict_text, "a single inline text");
  input_opt->excludes(text_opt);
  predict_cmd->add_option("--text-col", predict_text_col, "text column name");
  predict_cmd->add_option("--out", predict_out, "output path (default stdout)");
  predict_cmd->add_option("--format", predict_format, "csv or jsonl")
      ->check(CLI::IsMember({"csv", "jsonl"}));
  predict_cmd->callback([&] {
    if (predict_input.empty() && text_opt->count() == 0) {
      throw CLI::RequiredError("--input or --text");
    }
    run_predict(predict_model,
                predict_input.empty() ? std::nullopt : std::make_optional(predict_input),
                text_opt->count() ? std::make_optional(predict_text) : std::nullopt,
                predict_text_col,
                predict_out.empty() ? std::nullopt : std::make_optional(predict_out),
                predict_format);
  });

  // experiment
  std::string experiment_config;
  std::string experiment_out;
  unsigned experiment_threads = 0;
  auto* experiment_cmd =
      app.add_subcommand("experiment", "run the full dataset x feature-config matrix");
  experiment_cmd->add_option("--config", experiment_config, "experiment config JSON")->required();
  auto* exp_out_opt = experiment_cmd->add_option("--out", experiment_out,
                                                 "output directory (overrides config)");
  auto* exp_threads_opt =
      experiment_cmd->add_option("--threads", experiment_threads, "worker threads (speed only)");
  experiment_cmd->callback([&] {
    run_experiment_cmd(experiment_config,
                       exp_out_opt->count() ? std::make_optional(experiment_out) : std::nullopt,
                       exp_threads_opt->count() ? std::make_optional(experiment_threads)
                                                : std::nullopt);
  });

  // synth
  std::string synth_spec;
  std::string synth_out;
  auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic labeled corpus");
  synth_cmd->add_option("--spec", synth_spec, "generator spec JSON")->required();
  synth_cmd->add_option("--out", synth_out, "output CSV path")->required();
  synth_cmd->callback([&] { run_synth(synth_spec, synth_out); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help / --version
    app.exit(e);
    return 1;
  } catch (const ModelError& e) {
    std::cerr << "model error: " << e.what() << "\n";
    return 3;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
