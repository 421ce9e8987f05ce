#pragma once

#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "cmstress/corpus.hpp"
#include "cmstress/errors.hpp"
#include "cmstress/features.hpp"
#include "cmstress/forest.hpp"
#include "cmstress/metrics.hpp"
#include "cmstress/model_io.hpp"
#include "cmstress/rng.hpp"
#include "cmstress/version.hpp"

namespace cmstress {

struct FeatureConfig {
  AnalyzerConfig analyzer;
  WeightingScheme weighting = WeightingScheme::kTfIdf;
};

// Deterministic directory-safe name, e.g. word1_tfidf, char123_tfidf.
inline std::string config_slug(const FeatureConfig& fc) {
  std::string slug{to_string(fc.analyzer.analyzer)};
  if (fc.analyzer.ngram_max <= 9) {
    for (std::uint32_t n = fc.analyzer.ngram_min; n <= fc.analyzer.ngram_max; ++n) {
      slug += static_cast<char>('0' + n);
    }
  } else {
    slug += std::to_string(fc.analyzer.ngram_min) + "to" + std::to_string(fc.analyzer.ngram_max);
  }
  slug += fc.weighting == WeightingScheme::kTfIdf ? "_tfidf" : "_count";
  if (!fc.analyzer.lowercase) slug += "_rawcase";
  return slug;
}

// Human name for report tables; the three standard configurations get
// their conventional names.
inline std::string display_name(const FeatureConfig& fc) {
  const auto& a = fc.analyzer;
  if (a.analyzer == AnalyzerKind::kWord && a.ngram_min == 1 && a.ngram_max == 1 && a.lowercase) {
    if (fc.weighting == WeightingScheme::kTfIdf) return "TF-IDF";
    return "Uni-grams of Words";
  }
  if (a.analyzer == AnalyzerKind::kChar && a.ngram_min == 1 && a.ngram_max == 3 && a.lowercase &&
      fc.weighting == WeightingScheme::kTfIdf) {
    return "(1+2+3)-Grams of Characters";
  }
  return config_slug(fc);
}

// The three standard text representations: word uni-grams with TF-IDF,
// word uni-grams with raw counts, character (1+2+3)-grams with TF-IDF.
inline std::vector<FeatureConfig> default_feature_configs() {
  return {
      {{AnalyzerKind::kWord, 1, 1, true}, WeightingScheme::kTfIdf},
      {{AnalyzerKind::kWord, 1, 1, true}, WeightingScheme::kRawCount},
      {{AnalyzerKind::kChar, 1, 3, true}, WeightingScheme::kTfIdf},
  };
}

inline nlohmann::json feature_config_to_json(const FeatureConfig& fc) {
  return {
      {"analyzer", to_string(fc.analyzer.analyzer)},
      {"ngram_min", fc.analyzer.ngram_min},
      {"ngram_max", fc.analyzer.ngram_max},
      {"lowercase", fc.analyzer.lowercase},
      {"weighting", to_string(fc.weighting)},
  };
}

inline FeatureConfig feature_config_from_json(const nlohmann::json& j) {
  FeatureConfig fc;
  fc.analyzer.analyzer = analyzer_from_string(j.at("analyzer").get<std::string>());
  fc.analyzer.ngram_min = j.value("ngram_min", 1u);
  fc.analyzer.ngram_max = j.value("ngram_max", fc.analyzer.ngram_min);
  fc.analyzer.lowercase = j.value("lowercase", true);
  fc.weighting = weighting_from_string(j.at("weighting").get<std::string>());
  validate(fc.analyzer);
  return fc;
}

struct DatasetSpec {
  std::string language_tag;
  std::string train_path;
  std::string validation_path;
  std::optional<std::string> test_path;
};

enum class FinalTraining : std::uint8_t { kTrainOnly, kTrainPlusValidation };

inline std::string_view to_string(FinalTraining ft) {
  return ft == FinalTraining::kTrainOnly ? "train_only" : "train_plus_validation";
}

inline FinalTraining final_training_from_string(std::string_view s) {
  if (s == "train_only") return FinalTraining::kTrainOnly;
  if (s == "train_plus_validation") return FinalTraining::kTrainPlusValidation;
  throw DataError("unknown final_training \"" + std::string(s) + "\"");
}

struct ExperimentConfig {
  std::vector<DatasetSpec> datasets;
  std::vector<FeatureConfig> feature_configs = default_feature_configs();
  ForestParams forest;  // per-cell seeds are derived from `seed`, see below
  FinalTraining final_training = FinalTraining::kTrainOnly;
  std::string output_dir;
  std::uint64_t seed = 0;
  CsvColumns columns;
  unsigned n_threads = 1;  // affects speed only, never results
};

inline void validate(const ExperimentConfig& config) {
  if (config.datasets.empty()) throw DataError("experiment needs at least one dataset");
  if (config.feature_configs.empty()) {
    throw DataError("experiment needs at least one feature configuration");
  }
  for (const auto& ds : config.datasets) {
    if (ds.language_tag.empty()) throw DataError("dataset language_tag must not be empty");
    if (ds.train_path.empty() || ds.validation_path.empty()) {
      throw DataError("dataset \"" + ds.language_tag + "\" needs train_path and validation_path");
    }
    if (ds.train_path == ds.validation_path ||
        (ds.test_path && (*ds.test_path == ds.train_path || *ds.test_path == ds.validation_path))) {
      throw DataError("dataset \"" + ds.language_tag + "\" must use distinct paths per split");
    }
  }
  for (std::size_t i = 0; i < config.datasets.size(); ++i) {
    for (std::size_t k = i + 1; k < config.datasets.size(); ++k) {
      if (config.datasets[i].language_tag == config.datasets[k].language_tag) {
        throw DataError("duplicate dataset language_tag \"" +
                        config.datasets[i].language_tag + "\"");
      }
    }
  }
}

// Parses the experiment config document. Unknown feature/forest fields use
// their defaults; CLI flags may override output_dir and n_threads.
inline ExperimentConfig experiment_config_from_json(const nlohmann::json& j) {
  ExperimentConfig config;
  try {
    config.seed = j.value("seed", std::uint64_t{0});
    config.output_dir = j.value("output_dir", std::string{});
    if (j.contains("final_training")) {
      config.final_training = final_training_from_string(j.at("final_training").get<std::string>());
    }
    config.columns.text = j.value("text_col", std::string{"text"});
    config.columns.label = j.value("label_col", std::string{"label"});
    if (j.contains("forest")) {
      const auto& f = j.at("forest");
      config.forest.n_trees = f.value("n_trees", 100u);
      if (f.contains("max_depth") && !f.at("max_depth").is_null()) {
        config.forest.max_depth = f.at("max_depth").get<std::uint32_t>();
      }
      config.forest.min_samples_split = f.value("min_samples_split", 2u);
      if (f.contains("features_per_split")) {
        const auto& fps = f.at("features_per_split");
        if (fps.is_number()) {
          config.forest.feature_rule = FeatureRule::kFixed;
          config.forest.fixed_features = fps.get<std::uint32_t>();
        } else if (fps.get<std::string>() == "sqrt") {
          config.forest.feature_rule = FeatureRule::kSqrt;
        } else if (fps.get<std::string>() == "all") {
          config.forest.feature_rule = FeatureRule::kAll;
        } else {
          throw DataError("unknown features_per_split rule");
        }
      }
      config.forest.bootstrap = f.value("bootstrap", true);
    }
    if (j.contains("feature_configs")) {
      config.feature_configs.clear();
      for (const auto& fj : j.at("feature_configs")) {
        config.feature_configs.push_back(feature_config_from_json(fj));
      }
    }
    for (const auto& dj : j.at("datasets")) {
      DatasetSpec ds;
      ds.language_tag = dj.at("language_tag").get<std::string>();
      ds.train_path = dj.at("train_path").get<std::string>();
      ds.validation_path = dj.at("validation_path").get<std::string>();
      if (dj.contains("test_path") && !dj.at("test_path").is_null()) {
        ds.test_path = dj.at("test_path").get<std::string>();
      }
      config.datasets.push_back(std::move(ds));
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError("malformed experiment config: " + std::string(e.what()));
  }
  validate(config);
  return config;
}

struct CellResult {
  std::size_t dataset_index = 0;
  std::size_t config_index = 0;  // position in the original feature-config list
  std::string language_tag;
  FeatureConfig config;
  std::string slug;
  MetricsReport validation;
  std::optional<MetricsReport> test;  // labeled test data only
  std::string model_path;             // relative to output_dir
  double wall_seconds = 0.0;          // reported in run_log.txt only
};

struct ExperimentReport {
  std::uint64_t seed = 0;
  FinalTraining final_training = FinalTraining::kTrainOnly;
  std::vector<CellResult> cells;  // |datasets| x |feature_configs|, config order
};

struct BestSelection {
  std::size_t dataset_index = 0;
  std::string language_tag;
  std::size_t cell_index = 0;  // into ExperimentReport::cells
  std::string slug;
  double value = 0.0;
};

// Per-dataset argmax over feature configurations by a validation metric.
// Ties keep the configuration that comes earlier in the original config
// list, independent of report row order.
inline std::vector<BestSelection> select_best(const ExperimentReport& report,
                                              std::string_view criterion) {
  if (report.cells.empty()) throw DataError("cannot select from an empty report");
  std::vector<BestSelection> best;
  for (std::size_t i = 0; i < report.cells.size(); ++i) {
    const auto& cell = report.cells[i];
    const double value = metric_value(cell.validation, criterion);
    BestSelection* entry = nullptr;
    for (auto& b : best) {
      if (b.dataset_index == cell.dataset_index) entry = &b;
    }
    if (entry == nullptr) {
      best.push_back({cell.dataset_index, cell.language_tag, i, cell.slug, value});
      continue;
    }
    const auto& held = report.cells[entry->cell_index];
    if (value > entry->value ||
        (value == entry->value && cell.config_index < held.config_index)) {
      *entry = {cell.dataset_index, cell.language_tag, i, cell.slug, value};
    }
  }
  return best;
}

// Prediction record for one input text.
struct Prediction {
  std::size_t text_index = 0;
  Label label = Label::kNonStressed;
  std::array<std::uint64_t, kNumLabels> votes{};
};

inline std::vector<Prediction> predict_texts(const LoadedModel& model,
                                             const std::vector<std::string>& texts) {
  std::vector<Prediction> out;
  out.reserve(texts.size());
  for (std::size_t i = 0; i < texts.size(); ++i) {
    const SparseVector x = vectorize(texts[i], model.vocab, model.weighting);
    const Vote vote = predict_forest(model.forest, x);
    out.push_back({i, vote.label, vote.votes});
  }
  return out;
}

inline void write_predictions_csv(std::ostream& out, const std::vector<Prediction>& preds) {
  csv::write_record(out, {"text_index", "label", "votes_non_stressed", "votes_stressed"});
  for (const auto& p : preds) {
    csv::write_record(out, {std::to_string(p.text_index), std::string(to_string(p.label)),
                            std::to_string(p.votes[0]), std::to_string(p.votes[1])});
  }
}

inline void write_predictions_jsonl(std::ostream& out, const std::vector<Prediction>& preds) {
  for (const auto& p : preds) {
    nlohmann::json rec = {
        {"text_index", p.text_index},
        {"label", to_string(p.label)},
        {"votes",
         {{std::string(kLabelNames[0]), p.votes[0]}, {std::string(kLabelNames[1]), p.votes[1]}}},
    };
    out << rec.dump() << '\n';
  }
}

namespace detail {

inline const std::array<std::string_view, 7> kTableColumns = {
    "Macro F1-score",    "Macro Recall",    "Macro Precision", "Weighted F1-score",
    "Weighted Recall", "Weighted Precision", "Accuracy"};

inline void append_markdown_header(std::string& md, std::string_view first_col,
                                   std::string_view second_col) {
  md += "| ";
  md += first_col;
  md += " | ";
  md += second_col;
  for (auto col : kTableColumns) {
    md += " | ";
    md += col;
  }
  md += " |\n|";
  for (std::size_t i = 0; i < kTableColumns.size() + 2; ++i) md += "---|";
  md += "\n";
}

inline void append_markdown_row(std::string& md, std::string_view first_cell,
                                std::string_view second_cell, const MetricsReport& report) {
  md += "| ";
  md += first_cell;
  md += " | ";
  md += second_cell;
  for (auto name : kMetricNames) {
    md += " | ";
    md += format_3dp(metric_value(report, name));
  }
  md += " |\n";
}

inline void write_text_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << content;
  out.flush();
  if (!out) throw IoError("failed writing " + path.string());
}

inline std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm_utc{};
  gmtime_r(&now, &tm_utc);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buf;
}

// One dataset loaded into memory; test may be labeled, text-only, or absent.
struct LoadedDataset {
  LabeledCorpus train;
  LabeledCorpus validation;
  std::optional<LabeledCorpus> test_labeled;
  std::optional<std::vector<std::string>> test_texts;
};

inline LoadedDataset load_dataset(const DatasetSpec& ds, const CsvColumns& columns) {
  LoadedDataset data;
  data.train = load_corpus(ds.train_path, "train", columns, ds.language_tag);
  data.validation = load_corpus(ds.validation_path, "validation", columns, ds.language_tag);
  if (ds.test_path) {
    try {
      data.test_labeled = load_corpus(*ds.test_path, "test", columns, ds.language_tag);
    } catch (const MalformedHeaderError&) {
      // no label column: prediction-only test split
      data.test_texts = load_texts(*ds.test_path, columns.text);
    }
  }
  return data;
}

}  // namespace detail

// Runs the full pipeline for every dataset x feature configuration cell:
// vocabulary fit on the train split only, forest trained on train,
// validation scored, test predicted (and scored when labels exist). All
// artifacts below output_dir are byte-deterministic for a fixed config;
// wall-clock timings go to run_log.txt and nowhere else.
//
// Per-cell forest seeds are derived as mix_seed(config.seed, cell_index)
// with cell_index = dataset_index * |feature_configs| + config_index, so
// cells are independent but the whole experiment is a pure function of the
// config document.
inline ExperimentReport run_experiment(const ExperimentConfig& config) {
  validate(config);
  if (config.output_dir.empty()) throw DataError("output_dir must not be empty");
  namespace fs = std::filesystem;
  const fs::path out_root(config.output_dir);
  fs::create_directories(out_root);

  std::string run_log = "experiment started " + detail::utc_timestamp() + "\n";

  ExperimentReport report;
  report.seed = config.seed;
  report.final_training = config.final_training;

  for (std::size_t di = 0; di < config.datasets.size(); ++di) {
    const auto& ds = config.datasets[di];
    detail::LoadedDataset data;
    try {
      data = detail::load_dataset(ds, config.columns);
    } catch (const ModelError& e) {
      throw ModelError("dataset \"" + ds.language_tag + "\": " + e.what());
    } catch (const Error& e) {
      throw DataError("dataset \"" + ds.language_tag + "\": " + e.what());
    }

    for (std::size_t ci = 0; ci < config.feature_configs.size(); ++ci) {
      const auto& fc = config.feature_configs[ci];
      const std::size_t cell_index = di * config.feature_configs.size() + ci;
      const std::string slug = config_slug(fc);
      const std::string cell_name = ds.language_tag + "/" + slug;
      const auto started = std::chrono::steady_clock::now();
      try {
        const fs::path cell_dir = out_root / ds.language_tag / slug;
        fs::create_directories(cell_dir);

        ForestParams params = config.forest;
        params.seed = mix_seed(config.seed, cell_index);

        const Vocabulary vocab = fit_vocabulary(data.train, fc.analyzer);
        const auto x_train = transform_corpus(data.train, vocab, fc.weighting);
        const auto y_train = corpus_labels(data.train);
        Forest forest = train_forest(x_train, y_train, params, config.n_threads);
        forest.vocab_fingerprint = vocab.fingerprint();

        const auto x_val = transform_corpus(data.validation, vocab, fc.weighting);
        const auto y_val = corpus_labels(data.validation);
        std::vector<Label> val_pred;
        val_pred.reserve(x_val.size());
        for (const auto& x : x_val) val_pred.push_back(predict_forest(forest, x).label);

        CellResult cell;
        cell.dataset_index = di;
        cell.config_index = ci;
        cell.language_tag = ds.language_tag;
        cell.config = fc;
        cell.slug = slug;
        cell.validation = compute_metrics(confusion(y_val, val_pred));
        cell.model_path = (fs::path(ds.language_tag) / slug / "model.json").generic_string();

        save_model(forest, vocab, fc.weighting, cell_dir / "model.json");

        // test predictions use the train-only forest unless configured to
        // retrain on train+validation; the vocabulary stays train-only
        if (data.test_labeled || data.test_texts) {
          const Forest* test_forest = &forest;
          Forest merged_forest;
          if (config.final_training == FinalTraining::kTrainPlusValidation) {
            LabeledCorpus merged = data.train;
            merged.split_name = "train+validation";
            merged.docs.insert(merged.docs.end(), data.validation.docs.begin(),
                               data.validation.docs.end());
            const auto x_merged = transform_corpus(merged, vocab, fc.weighting);
            const auto y_merged = corpus_labels(merged);
            merged_forest = train_forest(x_merged, y_merged, params, config.n_threads);
            merged_forest.vocab_fingerprint = vocab.fingerprint();
            save_model(merged_forest, vocab, fc.weighting, cell_dir / "model_final.json");
            test_forest = &merged_forest;
          }

          const std::vector<std::string>* texts = nullptr;
          std::vector<std::string> labeled_texts;
          if (data.test_labeled) {
            labeled_texts.reserve(data.test_labeled->docs.size());
            for (const auto& doc : data.test_labeled->docs) labeled_texts.push_back(doc.text);
            texts = &labeled_texts;
          } else {
            texts = &*data.test_texts;
          }

          std::vector<Prediction> preds;
          preds.reserve(texts->size());
          std::vector<Label> test_pred;
          test_pred.reserve(texts->size());
          for (std::size_t k = 0; k < texts->size(); ++k) {
            const SparseVector x = vectorize((*texts)[k], vocab, fc.weighting);
            const Vote vote = predict_forest(*test_forest, x);
            preds.push_back({k, vote.label, vote.votes});
            test_pred.push_back(vote.label);
          }
          std::ofstream pred_out(cell_dir / "test_predictions.csv", std::ios::binary);
          if (!pred_out) throw IoError("cannot write test predictions for " + cell_name);
          write_predictions_csv(pred_out, preds);

          if (data.test_labeled && !test_pred.empty()) {
            cell.test = compute_metrics(confusion(corpus_labels(*data.test_labeled), test_pred));
          }
        }

        nlohmann::json cell_json = {
            {"artifact_version", kArtifactVersion},
            {"language_tag", ds.language_tag},
            {"config",
             {{"feature", feature_config_to_json(fc)},
              {"slug", slug},
              {"forest", forest_params_to_json(params)},
              {"final_training", to_string(config.final_training)}}},
            {"validation", metrics_to_json(cell.validation)},
        };
        if (cell.test) cell_json["test"] = metrics_to_json(*cell.test);
        detail::write_text_file(cell_dir / "metrics.json", cell_json.dump(2) + "\n");

        std::string cell_md = "# " + ds.language_tag + " / " + display_name(fc) + "\n\n";
        cell_md += "Validation (" + std::to_string(data.validation.size()) + " documents)\n\n";
        cell_md += std::string(kTableHeader) + "\n" + metrics_row(cell.validation) + "\n";
        if (cell.test) {
          cell_md += "\nTest (" + std::to_string(data.test_labeled->size()) + " documents)\n\n";
          cell_md += std::string(kTableHeader) + "\n" + metrics_row(*cell.test) + "\n";
        }
        detail::write_text_file(cell_dir / "report.md", cell_md);

        cell.wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        char timing[64];
        std::snprintf(timing, sizeof(timing), "%.3fs", cell.wall_seconds);
        run_log += detail::utc_timestamp() + " cell " + cell_name + " finished in " + timing + "\n";
        report.cells.push_back(std::move(cell));
      } catch (const ModelError& e) {
        throw ModelError("cell " + cell_name + ": " + e.what());
      } catch (const DataError& e) {
        throw DataError("cell " + cell_name + ": " + e.what());
      } catch (const Error& e) {
        throw Error("cell " + cell_name + ": " + e.what());
      }
    }
  }

  const auto best = select_best(report, "macro_f1");

  nlohmann::json cells_json = nlohmann::json::array();
  for (const auto& cell : report.cells) {
    nlohmann::json cj = {
        {"language_tag", cell.language_tag},
        {"slug", cell.slug},
        {"feature", display_name(cell.config)},
        {"model", cell.model_path},
        {"validation", metrics_to_json(cell.validation)},
    };
    if (cell.test) cj["test"] = metrics_to_json(*cell.test);
    cells_json.push_back(std::move(cj));
  }
  nlohmann::json best_json = nlohmann::json::array();
  for (const auto& b : best) {
    best_json.push_back({{"language_tag", b.language_tag},
                         {"slug", b.slug},
                         {"value", b.value}});
  }
  const nlohmann::json report_json = {
      {"artifact_version", kArtifactVersion},
      {"seed", report.seed},
      {"final_training", to_string(report.final_training)},
      {"cells", std::move(cells_json)},
      {"best", {{"criterion", "macro_f1"}, {"selections", std::move(best_json)}}},
  };
  detail::write_text_file(out_root / "report.json", report_json.dump(2) + "\n");

  std::string md = "# Experiment report\n\n## Validation results\n\n";
  detail::append_markdown_header(md, "Data set", "Feature");
  for (const auto& cell : report.cells) {
    detail::append_markdown_row(md, cell.language_tag, display_name(cell.config),
                                cell.validation);
  }
  md += "\n## Best configuration per data set (validation macro_f1)\n\n";
  md += "| Data set | Feature | macro_f1 |\n|---|---|---|\n";
  for (const auto& b : best) {
    md += "| " + b.language_tag + " | " +
          display_name(report.cells[b.cell_index].config) + " | " + format_3dp(b.value) +
          " |\n";
  }
  bool any_test = false;
  for (const auto& b : best) {
    if (report.cells[b.cell_index].test) any_test = true;
  }
  if (any_test) {
    md += "\n## Test results (best validation configuration per data set)\n\n";
    detail::append_markdown_header(md, "Data set", "Feature");
    for (const auto& b : best) {
      const auto& cell = report.cells[b.cell_index];
      if (cell.test) {
        detail::append_markdown_row(md, cell.language_tag, display_name(cell.config),
                                    *cell.test);
      }
    }
  }
  detail::write_text_file(out_root / "report.md", md);

  run_log += "experiment finished " + detail::utc_timestamp() + "\n";
  detail::write_text_file(out_root / "run_log.txt", run_log);
  return report;
}

}  // namespace cmstress
