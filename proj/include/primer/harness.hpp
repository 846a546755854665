#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "primer/corpus.hpp"
#include "primer/embedding.hpp"
#include "primer/learner.hpp"
#include "primer/ordering.hpp"
#include "primer/types.hpp"

namespace primer {

struct ExperimentConfig {
  // dataset: a file when dataset_path is set, otherwise the synthetic corpus
  std::string dataset_path;
  DatasetFormat dataset_format = DatasetFormat::csv;
  SyntheticSpec synth_spec;
  std::uint64_t synth_seed = 7;

  double train_fraction = 0.8;
  std::uint64_t split_seed = 13;

  // embeddings: loaded from embeddings_path when set, otherwise trained
  std::string embeddings_path;
  SgnsConfig sgns;

  std::vector<Strategy> strategies = {Strategy::interleaved, Strategy::block,
                                      Strategy::random};
  std::string metric = "cosine";  // cosine | euclidean | wu-palmer
  std::string wordnet_dir;        // required for wu-palmer
  int tfidf_top_k = 10;

  std::string learner = "cct";  // cct | icarl | eeil
  CctConfig cct;
  EeilConfig eeil;
  int icarl_budget = 20;
  // Rehearsal memory for the cct learner: unset = keep everything, 0 = none.
  std::optional<int> cct_memory_budget;
  bool open_set_eval = false;

  int initial_classes = 5;
  // Classes added after pretraining; default min(K - initial_classes, 15).
  std::optional<int> iterations;
  std::vector<std::uint64_t> seeds = {1};
  std::string output_dir = "out";
  bool verbose = true;

  static ExperimentConfig from_json(const nlohmann::json& j);
  /// JSON file, or a line-per-entry "dotted.key=value" file (comma-separated
  /// values become arrays, '#' starts a comment).
  static ExperimentConfig from_file(const std::string& path);
};

struct IterationRecord {
  int iteration = 0;
  int classes_seen = 0;
  double accuracy = 0.0;        // micro over seen-class test documents
  double macro_accuracy = 0.0;  // mean of per-class accuracies
};

struct RunResult {
  std::string strategy;
  std::uint64_t seed = 0;
  std::vector<IterationRecord> records;  // iterations consecutive from 0
};

struct StrategyCurve {
  std::string strategy;
  std::vector<double> mean;
  std::vector<double> stddev;  // sample standard deviation (n-1)
  int n = 0;                   // runs aggregated
};

struct AggregateResult {
  std::vector<StrategyCurve> curves;  // strategies in first-appearance order
};

/// One incremental-learning run per (strategy, seed): pretrain on a shared
/// first-m class prefix, then add one class per iteration with rehearsal and
/// record accuracy on the seen classes' test documents. Deterministic for a
/// fixed config.
std::vector<RunResult> run(const ExperimentConfig& config);

AggregateResult aggregate(const std::vector<RunResult>& results);

/// Writes results.csv, summary.csv and curves.svg into dir.
void emit(const std::vector<RunResult>& results, const AggregateResult& agg,
          const std::string& dir);

void write_results_csv(const std::vector<RunResult>& results,
                       const std::string& path);
std::vector<RunResult> read_results_csv(const std::string& path);

std::string render_curves_svg(const AggregateResult& agg);

/// Feature matrix with one row per corpus document (mean word vector).
Matrix doc_features(const Corpus& corpus, const EmbeddingTable& table);

/// Standardizes each column to zero mean and unit variance in place
/// (constant columns are left centered). Document embeddings concentrate in
/// a narrow cone, so the classifiers train on standardized features.
void standardize_columns(Matrix& features);

int cli_main(int argc, char** argv);

}  // namespace primer
