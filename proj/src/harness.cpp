#include "primer/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>

#include <CLI11.hpp>

#include "primer/classmetrics.hpp"
#include "primer/csv.hpp"
#include "primer/error.hpp"
#include "primer/taxonomy.hpp"

namespace primer {

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

// ---------------------------------------------------------------------------
// Config parsing.

using nlohmann::json;

[[noreturn]] void bad_field(const std::string& where) {
  throw ValidationError("config: bad value for '" + where + "'");
}

template <typename T>
T get_or(const json& j, const std::string& key, T fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    bad_field(key);
  }
}

json section(const json& j, const std::string& key) {
  if (!j.contains(key) || j.at(key).is_null()) return json::object();
  if (!j.at(key).is_object()) bad_field(key);
  return j.at(key);
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  if (!j.is_object()) throw ValidationError("config root must be an object");
  ExperimentConfig cfg;

  const json dataset = section(j, "dataset");
  cfg.dataset_path = get_or<std::string>(dataset, "path", "");
  const std::string format = get_or<std::string>(dataset, "format", "csv");
  if (auto f = parse_dataset_format(format)) {
    cfg.dataset_format = *f;
  } else {
    throw ValidationError("config: unknown dataset format '" + format + "'");
  }
  cfg.synth_seed = get_or<std::uint64_t>(dataset, "seed", cfg.synth_seed);
  const json synth = section(dataset, "synthetic");
  cfg.synth_spec.n_classes =
      get_or<int>(synth, "n_classes", cfg.synth_spec.n_classes);
  cfg.synth_spec.n_topic_groups =
      get_or<int>(synth, "n_topic_groups", cfg.synth_spec.n_topic_groups);
  cfg.synth_spec.docs_per_class =
      get_or<int>(synth, "docs_per_class", cfg.synth_spec.docs_per_class);
  cfg.synth_spec.doc_length =
      get_or<int>(synth, "doc_length", cfg.synth_spec.doc_length);
  cfg.synth_spec.vocab_per_topic =
      get_or<int>(synth, "vocab_per_topic", cfg.synth_spec.vocab_per_topic);
  cfg.synth_spec.overlap_fraction =
      get_or<double>(synth, "overlap_fraction", cfg.synth_spec.overlap_fraction);

  const json split = section(j, "split");
  cfg.train_fraction = get_or<double>(split, "train_fraction", cfg.train_fraction);
  cfg.split_seed = get_or<std::uint64_t>(split, "seed", cfg.split_seed);
  if (!(cfg.train_fraction > 0.0 && cfg.train_fraction < 1.0)) {
    throw ValidationError("config: train_fraction must lie in (0,1)");
  }

  const json embedding = section(j, "embedding");
  cfg.embeddings_path = get_or<std::string>(embedding, "path", "");
  cfg.sgns.dim = get_or<int>(embedding, "dim", cfg.sgns.dim);
  cfg.sgns.window = get_or<int>(embedding, "window", cfg.sgns.window);
  cfg.sgns.negatives = get_or<int>(embedding, "negatives", cfg.sgns.negatives);
  cfg.sgns.epochs = get_or<int>(embedding, "epochs", cfg.sgns.epochs);
  cfg.sgns.learning_rate =
      get_or<double>(embedding, "learning_rate", cfg.sgns.learning_rate);
  cfg.sgns.min_count = get_or<int>(embedding, "min_count", cfg.sgns.min_count);
  cfg.sgns.subsample_threshold = get_or<double>(embedding, "subsample_threshold",
                                                cfg.sgns.subsample_threshold);
  cfg.sgns.seed = get_or<std::uint64_t>(embedding, "seed", cfg.sgns.seed);

  const json ordering = section(j, "ordering");
  if (ordering.contains("strategies")) {
    if (!ordering.at("strategies").is_array()) bad_field("ordering.strategies");
    cfg.strategies.clear();
    for (const auto& s : ordering.at("strategies")) {
      if (!s.is_string()) bad_field("ordering.strategies");
      auto strat = parse_strategy(s.get<std::string>());
      if (!strat) {
        throw ValidationError("config: unknown strategy '" +
                              s.get<std::string>() + "'");
      }
      cfg.strategies.push_back(*strat);
    }
  }
  if (cfg.strategies.empty()) {
    throw ValidationError("config: at least one ordering strategy is required");
  }
  cfg.metric = get_or<std::string>(ordering, "metric", cfg.metric);
  if (cfg.metric != "cosine" && cfg.metric != "euclidean" &&
      cfg.metric != "wu-palmer") {
    throw ValidationError("config: unknown ordering metric '" + cfg.metric + "'");
  }
  cfg.wordnet_dir = get_or<std::string>(ordering, "wordnet_dir", "");
  cfg.tfidf_top_k = get_or<int>(ordering, "tfidf_top_k", cfg.tfidf_top_k);
  if (cfg.tfidf_top_k < 1) {
    throw ValidationError("config: tfidf_top_k must be >= 1");
  }

  const json learner = section(j, "learner");
  cfg.learner = get_or<std::string>(learner, "kind", cfg.learner);
  if (cfg.learner != "cct" && cfg.learner != "icarl" && cfg.learner != "eeil") {
    throw ValidationError("config: unknown learner '" + cfg.learner + "'");
  }
  cfg.cct.hidden = get_or<int>(learner, "hidden", cfg.cct.hidden);
  cfg.cct.tau = get_or<double>(learner, "tau", cfg.cct.tau);
  cfg.cct.pretrain_epochs =
      get_or<int>(learner, "pretrain_epochs", cfg.cct.pretrain_epochs);
  cfg.cct.increment_epochs =
      get_or<int>(learner, "increment_epochs", cfg.cct.increment_epochs);
  cfg.cct.learning_rate =
      get_or<double>(learner, "learning_rate", cfg.cct.learning_rate);
  cfg.cct.batch_size = get_or<int>(learner, "batch_size", cfg.cct.batch_size);
  cfg.cct.prime_new_node =
      get_or<bool>(learner, "prime_new_node", cfg.cct.prime_new_node);
  cfg.eeil.hidden = cfg.cct.hidden;
  cfg.eeil.pretrain_epochs = cfg.cct.pretrain_epochs;
  cfg.eeil.increment_epochs = cfg.cct.increment_epochs;
  cfg.eeil.learning_rate = cfg.cct.learning_rate;
  cfg.eeil.batch_size = cfg.cct.batch_size;
  cfg.eeil.memory_budget =
      get_or<int>(learner, "memory_budget", cfg.eeil.memory_budget);
  cfg.eeil.distill.temperature =
      get_or<double>(learner, "temperature", cfg.eeil.distill.temperature);
  cfg.eeil.distill.lambda =
      get_or<double>(learner, "lambda", cfg.eeil.distill.lambda);
  cfg.icarl_budget = get_or<int>(learner, "memory_budget", cfg.icarl_budget);
  if (learner.contains("cct_memory_budget") &&
      !learner.at("cct_memory_budget").is_null()) {
    cfg.cct_memory_budget = get_or<int>(learner, "cct_memory_budget", 0);
  }
  cfg.open_set_eval = get_or<bool>(learner, "open_set_eval", cfg.open_set_eval);

  cfg.initial_classes = get_or<int>(j, "initial_classes", cfg.initial_classes);
  if (cfg.initial_classes < 2) {
    throw ValidationError("config: initial_classes must be >= 2");
  }
  if (j.contains("iterations") && !j.at("iterations").is_null()) {
    cfg.iterations = get_or<int>(j, "iterations", 0);
    if (*cfg.iterations < 0) {
      throw ValidationError("config: iterations must be >= 0");
    }
  }
  if (j.contains("seeds")) {
    if (!j.at("seeds").is_array()) bad_field("seeds");
    cfg.seeds.clear();
    for (const auto& s : j.at("seeds")) {
      if (!s.is_number()) bad_field("seeds");
      cfg.seeds.push_back(s.get<std::uint64_t>());
    }
  }
  if (cfg.seeds.empty()) {
    throw ValidationError("config: at least one seed is required");
  }
  cfg.output_dir = get_or<std::string>(j, "output_dir", cfg.output_dir);
  cfg.verbose = get_or<bool>(j, "verbose", cfg.verbose);
  return cfg;
}

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

// Scalar typing for key=value configs: bool, null, number, else string.
json scalar_value(const std::string& raw) {
  const std::string v = trim(raw);
  if (v == "true") return true;
  if (v == "false") return false;
  if (v == "null") return nullptr;
  if (v.size() >= 2 && v.front() == '"' && v.back() == '"') {
    return v.substr(1, v.size() - 2);
  }
  try {
    std::size_t pos = 0;
    if (v.find_first_of(".eE") == std::string::npos) {
      if (!v.empty() && v[0] == '-') {
        long long n = std::stoll(v, &pos);
        if (pos == v.size()) return n;
      } else {
        unsigned long long n = std::stoull(v, &pos);
        if (pos == v.size()) return n;
      }
    } else {
      double d = std::stod(v, &pos);
      if (pos == v.size()) return d;
    }
  } catch (const std::exception&) {
  }
  return v;
}

json parse_key_value_config(const std::string& text) {
  json root = json::object();
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw FormatError("config line " + std::to_string(line_no) +
                        ": expected key=value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw FormatError("config line " + std::to_string(line_no) +
                        ": empty key");
    }
    json parsed;
    if (value.find(',') != std::string::npos) {
      parsed = json::array();
      std::istringstream parts(value);
      std::string part;
      while (std::getline(parts, part, ',')) parsed.push_back(scalar_value(part));
    } else {
      parsed = scalar_value(value);
    }
    // dotted keys address nested objects
    json* node = &root;
    std::size_t start = 0;
    while (true) {
      const auto dot = key.find('.', start);
      if (dot == std::string::npos) {
        (*node)[key.substr(start)] = std::move(parsed);
        break;
      }
      node = &(*node)[key.substr(start, dot - start)];
      if (node->is_null()) *node = json::object();
      start = dot + 1;
    }
  }
  return root;
}

}  // namespace

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  const std::string text = csv::read_file(path);
  const std::string body = trim(text);
  json j;
  if (!body.empty() && body.front() == '{') {
    try {
      j = json::parse(body);
    } catch (const json::exception& e) {
      throw FormatError("config " + path + ": " + e.what());
    }
  } else {
    j = parse_key_value_config(text);
  }
  return from_json(j);
}

// ---------------------------------------------------------------------------
// Experiment driver.

Matrix doc_features(const Corpus& corpus, const EmbeddingTable& table) {
  const auto n = static_cast<Eigen::Index>(corpus.documents().size());
  Matrix features(n, table.dim);
  for (Eigen::Index i = 0; i < n; ++i) {
    features.row(i) =
        doc_vector(corpus.documents()[static_cast<std::size_t>(i)], table)
            .transpose();
  }
  return features;
}

void standardize_columns(Matrix& features) {
  if (features.rows() == 0) return;
  const Vector mean = features.colwise().mean().transpose();
  features.rowwise() -= mean.transpose();
  const Vector std_dev =
      (features.array().square().colwise().mean()).sqrt().transpose().matrix();
  for (Eigen::Index j = 0; j < features.cols(); ++j) {
    if (std_dev(j) > 1e-12) features.col(j) /= std_dev(j);
  }
}

namespace {

// Uniform protocol surface over the three learners.
class LearnerDriver {
 public:
  virtual ~LearnerDriver() = default;
  virtual void pretrain(const std::vector<ClassData>& classes) = 0;
  virtual void increment(const ClassData& new_class) = 0;
  virtual int predict(const Vector& x) const = 0;
};

class CctDriver : public LearnerDriver {
 public:
  CctDriver(CctConfig config, std::optional<int> memory_budget, bool open_set)
      : config_(config), memory_(memory_budget), open_set_(open_set) {}

  void pretrain(const std::vector<ClassData>& classes) override {
    model_ = cct_pretrain(classes, config_);
    for (const auto& c : classes) memory_.add_class(c.class_id, c.features);
  }

  void increment(const ClassData& new_class) override {
    model_ = cct_increment(std::move(model_), new_class, memory_, config_);
  }

  int predict(const Vector& x) const override {
    return open_set_ ? cct_predict(model_, x) : cct_predict_closed(model_, x);
  }

 private:
  CctConfig config_;
  CctModel model_;
  ExemplarMemory memory_;
  bool open_set_;
};

class IcarlDriver : public LearnerDriver {
 public:
  explicit IcarlDriver(int budget) : state_(icarl_init(budget)) {}

  void pretrain(const std::vector<ClassData>& classes) override {
    for (const auto& c : classes) state_ = icarl_increment(std::move(state_), c);
  }

  void increment(const ClassData& new_class) override {
    state_ = icarl_increment(std::move(state_), new_class);
  }

  int predict(const Vector& x) const override { return icarl_predict(state_, x); }

 private:
  IcarlState state_;
};

class EeilDriver : public LearnerDriver {
 public:
  explicit EeilDriver(EeilConfig config) : config_(config) {}

  void pretrain(const std::vector<ClassData>& classes) override {
    state_ = eeil_pretrain(classes, config_);
  }

  void increment(const ClassData& new_class) override {
    state_ = eeil_increment(std::move(state_), new_class, config_);
  }

  int predict(const Vector& x) const override { return eeil_predict(state_, x); }

 private:
  EeilConfig config_;
  EeilState state_;
};

std::unique_ptr<LearnerDriver> make_driver(const ExperimentConfig& cfg,
                                           std::uint64_t seed) {
  if (cfg.learner == "cct") {
    CctConfig c = cfg.cct;
    c.seed = seed;
    return std::make_unique<CctDriver>(c, cfg.cct_memory_budget,
                                       cfg.open_set_eval);
  }
  if (cfg.learner == "icarl") {
    return std::make_unique<IcarlDriver>(cfg.icarl_budget);
  }
  EeilConfig c = cfg.eeil;
  c.seed = seed;
  return std::make_unique<EeilDriver>(c);
}

struct EvalData {
  // per class: positions (corpus document indices) of its test documents
  std::vector<std::vector<int>> test_docs;
};

IterationRecord evaluate(const LearnerDriver& driver, const Matrix& features,
                         const EvalData& eval, const std::vector<int>& seen,
                         int iteration) {
  IterationRecord rec;
  rec.iteration = iteration;
  rec.classes_seen = static_cast<int>(seen.size());
  long correct = 0, total = 0;
  double macro_sum = 0.0;
  for (int c : seen) {
    const auto& docs = eval.test_docs[static_cast<std::size_t>(c)];
    long class_correct = 0;
    for (int d : docs) {
      const int pred = driver.predict(features.row(d).transpose());
      if (pred == c) ++class_correct;
    }
    correct += class_correct;
    total += static_cast<long>(docs.size());
    macro_sum += docs.empty() ? 0.0
                              : static_cast<double>(class_correct) /
                                    static_cast<double>(docs.size());
  }
  rec.accuracy =
      total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(total);
  rec.macro_accuracy = seen.empty() ? 0.0 : macro_sum / static_cast<double>(seen.size());
  return rec;
}

AdjacencyMatrix build_ordering_matrix(const ExperimentConfig& cfg,
                                      const CorpusView& train,
                                      const EmbeddingTable& table,
                                      std::ostream* log) {
  const Corpus& corpus = train.base();
  if (cfg.metric == "wu-palmer") {
    if (cfg.wordnet_dir.empty()) {
      throw ValidationError(
          "the wu-palmer metric requires a wordnet directory");
    }
    Taxonomy taxonomy = parse_wordnet(cfg.wordnet_dir);
    auto top = tfidf_top_words(train, cfg.tfidf_top_k);
    SemanticMatrixResult res = semantic_matrix(top, taxonomy);
    if (log != nullptr) {
      *log << "wu-palmer coverage: skipped " << res.skipped_pairs << " of "
           << res.total_pairs << " word pairs ("
           << fmt2(100.0 * res.skipped_fraction()) << "%)\n";
      for (auto [a, b] : res.uncovered_class_pairs) {
        *log << "warning: no taxonomy coverage for classes '"
             << corpus.class_name(a) << "' and '" << corpus.class_name(b)
             << "'; their similarity defaults to 0\n";
      }
    }
    return res.matrix;
  }
  std::vector<ClassExemplar> exemplars;
  exemplars.reserve(static_cast<std::size_t>(corpus.num_classes()));
  for (int c = 0; c < corpus.num_classes(); ++c) {
    exemplars.push_back(class_exemplar(c, train, table));
  }
  const AssocMetric metric =
      cfg.metric == "cosine" ? AssocMetric::cosine : AssocMetric::euclidean;
  return associative_matrix(exemplars, metric);
}

}  // namespace

std::vector<RunResult> run(const ExperimentConfig& cfg) {
  std::ostream* log = cfg.verbose ? &std::cout : nullptr;

  Corpus corpus = cfg.dataset_path.empty()
                      ? synthesize(cfg.synth_spec, cfg.synth_seed)
                      : load_dataset(cfg.dataset_path, cfg.dataset_format);
  const int k = corpus.num_classes();
  const int m = cfg.initial_classes;
  if (m >= k) {
    throw ValidationError("initial_classes " + std::to_string(m) +
                          " must be below the class count " + std::to_string(k));
  }
  const int iterations = cfg.iterations ? *cfg.iterations : std::min(k - m, 15);
  if (m + iterations > k) {
    throw ValidationError("initial_classes + iterations = " +
                          std::to_string(m + iterations) +
                          " exceeds the class count " + std::to_string(k));
  }
  if (log != nullptr) {
    *log << "dataset: " << k << " classes, " << corpus.documents().size()
         << " documents, vocabulary " << corpus.vocab_size() << "\n";
  }

  SplitCorpus sc = split(corpus, cfg.train_fraction, cfg.split_seed);

  EmbeddingTable table;
  if (cfg.embeddings_path.empty()) {
    if (log != nullptr) *log << "training embeddings...\n";
    table = train_sgns(corpus, cfg.sgns);
  } else {
    table = load_pretrained(cfg.embeddings_path, corpus);
    if (log != nullptr && table.missing_words > 0) {
      *log << "warning: " << table.missing_words
           << " vocabulary words missing from " << cfg.embeddings_path << "\n";
    }
  }

  Matrix features = doc_features(corpus, table);
  standardize_columns(features);

  AdjacencyMatrix adj = build_ordering_matrix(cfg, sc.train, table, log);

  ClassOrder interleaved = interleaved_order(adj);
  const std::vector<int> prefix(interleaved.sequence.begin(),
                                interleaved.sequence.begin() + m);
  ClassOrder block = extend_order(adj, prefix, Strategy::block);

  // per-class training features and test documents
  std::vector<ClassData> class_data(static_cast<std::size_t>(k));
  EvalData eval;
  eval.test_docs.resize(static_cast<std::size_t>(k));
  for (int c = 0; c < k; ++c) {
    const std::vector<int> train_docs = sc.train.docs_of_class(c);
    ClassData& data = class_data[static_cast<std::size_t>(c)];
    data.class_id = c;
    data.features = Matrix(static_cast<Eigen::Index>(train_docs.size()),
                           features.cols());
    for (std::size_t i = 0; i < train_docs.size(); ++i) {
      data.features.row(static_cast<Eigen::Index>(i)) =
          features.row(train_docs[i]);
    }
    eval.test_docs[static_cast<std::size_t>(c)] = sc.test.docs_of_class(c);
  }

  std::vector<int> all_ids(static_cast<std::size_t>(k));
  for (int c = 0; c < k; ++c) all_ids[static_cast<std::size_t>(c)] = c;

  std::vector<RunResult> results;
  for (Strategy strategy : cfg.strategies) {
    for (std::uint64_t seed : cfg.seeds) {
      std::vector<int> sequence;
      switch (strategy) {
        case Strategy::interleaved:
          sequence = interleaved.sequence;
          break;
        case Strategy::block:
          sequence = block.sequence;
          break;
        case Strategy::random:
          sequence = random_order(all_ids, prefix, seed).sequence;
          break;
      }

      RunResult rr;
      rr.strategy = strategy_name(strategy);
      rr.seed = seed;

      auto driver = make_driver(cfg, seed);
      std::vector<ClassData> pretrain_classes;
      pretrain_classes.reserve(static_cast<std::size_t>(m));
      for (int i = 0; i < m; ++i) {
        pretrain_classes.push_back(
            class_data[static_cast<std::size_t>(sequence[i])]);
      }
      driver->pretrain(pretrain_classes);

      std::vector<int> seen(sequence.begin(), sequence.begin() + m);
      rr.records.push_back(evaluate(*driver, features, eval, seen, 0));
      for (int t = 1; t <= iterations; ++t) {
        const int next = sequence[static_cast<std::size_t>(m + t - 1)];
        driver->increment(class_data[static_cast<std::size_t>(next)]);
        seen.push_back(next);
        rr.records.push_back(evaluate(*driver, features, eval, seen, t));
      }
      if (log != nullptr) {
        *log << rr.strategy << " seed " << seed << ": final accuracy "
             << fmt2(rr.records.back().accuracy) << " over "
             << rr.records.back().classes_seen << " classes\n";
      }
      results.push_back(std::move(rr));
    }
  }
  return results;
}

AggregateResult aggregate(const std::vector<RunResult>& results) {
  if (results.empty()) {
    throw ValidationError("no run results to aggregate");
  }
  std::vector<std::string> order;
  std::map<std::string, std::vector<const RunResult*>> groups;
  for (const auto& r : results) {
    if (groups.find(r.strategy) == groups.end()) order.push_back(r.strategy);
    groups[r.strategy].push_back(&r);
  }
  AggregateResult agg;
  for (const auto& name : order) {
    const auto& runs = groups[name];
    const std::size_t records = runs.front()->records.size();
    for (const auto* r : runs) {
      if (r->records.size() != records) {
        throw ValidationError("runs for strategy '" + name +
                              "' have ragged iteration counts");
      }
    }
    StrategyCurve curve;
    curve.strategy = name;
    curve.n = static_cast<int>(runs.size());
    curve.mean.resize(records);
    curve.stddev.resize(records);
    for (std::size_t t = 0; t < records; ++t) {
      double sum = 0.0;
      for (const auto* r : runs) sum += r->records[t].accuracy;
      const double mean = sum / static_cast<double>(runs.size());
      double sq = 0.0;
      for (const auto* r : runs) {
        const double d = r->records[t].accuracy - mean;
        sq += d * d;
      }
      curve.mean[t] = mean;
      curve.stddev[t] =
          runs.size() > 1
              ? std::sqrt(sq / static_cast<double>(runs.size() - 1))
              : 0.0;
    }
    agg.curves.push_back(std::move(curve));
  }
  return agg;
}

// ---------------------------------------------------------------------------
// Emission.

void write_results_csv(const std::vector<RunResult>& results,
                       const std::string& path) {
  std::ostringstream out;
  csv::write_row(out, {"strategy", "seed", "iteration", "classes_seen",
                       "accuracy", "macro_accuracy"});
  for (const auto& r : results) {
    for (const auto& rec : r.records) {
      csv::write_row(out, {r.strategy, std::to_string(r.seed),
                           std::to_string(rec.iteration),
                           std::to_string(rec.classes_seen),
                           fmt17(rec.accuracy), fmt17(rec.macro_accuracy)});
    }
  }
  csv::write_file(path, out.str());
}

std::vector<RunResult> read_results_csv(const std::string& path) {
  const auto rows = csv::parse_file(path);
  if (rows.empty()) throw FormatError(path + ": empty results file");
  const std::vector<std::string> header = {"strategy",     "seed",
                                           "iteration",    "classes_seen",
                                           "accuracy",     "macro_accuracy"};
  if (rows[0] != header) {
    throw FormatError(path + ": unexpected results header");
  }
  std::vector<RunResult> results;
  auto find_run = [&](const std::string& strategy,
                      std::uint64_t seed) -> RunResult& {
    for (auto& r : results) {
      if (r.strategy == strategy && r.seed == seed) return r;
    }
    results.push_back(RunResult{strategy, seed, {}});
    return results.back();
  };
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& row = rows[i];
    if (row.size() != header.size()) {
      throw FormatError(path + ": row " + std::to_string(i + 1) + " has " +
                        std::to_string(row.size()) + " fields");
    }
    try {
      IterationRecord rec;
      rec.iteration = std::stoi(row[2]);
      rec.classes_seen = std::stoi(row[3]);
      rec.accuracy = std::stod(row[4]);
      rec.macro_accuracy = std::stod(row[5]);
      find_run(row[0], std::stoull(row[1])).records.push_back(rec);
    } catch (const std::exception&) {
      throw FormatError(path + ": row " + std::to_string(i + 1) +
                        " has a malformed value");
    }
  }
  return results;
}

namespace {

std::string strategy_color(const std::string& name, std::size_t index) {
  if (name == "interleaved") return "#1f77b4";
  if (name == "block") return "#d62728";
  if (name == "random") return "#2ca02c";
  const char* extras[] = {"#9467bd", "#8c564b", "#e377c2"};
  return extras[index % 3];
}

}  // namespace

std::string render_curves_svg(const AggregateResult& agg) {
  constexpr double kWidth = 720, kHeight = 480;
  constexpr double kLeft = 64, kRight = 560, kTop = 40, kBottom = 432;
  const double plot_w = kRight - kLeft, plot_h = kBottom - kTop;

  std::size_t max_records = 1;
  for (const auto& c : agg.curves) {
    max_records = std::max(max_records, c.mean.size());
  }
  const double denom = max_records > 1 ? static_cast<double>(max_records - 1) : 1.0;
  auto x_at = [&](std::size_t t) {
    return kLeft + plot_w * static_cast<double>(t) / denom;
  };
  auto y_at = [&](double acc) { return kBottom - plot_h * acc; };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"720\" "
         "height=\"480\" viewBox=\"0 0 720 480\">\n";
  svg << "<rect width=\"720\" height=\"480\" fill=\"white\"/>\n";
  svg << "<g font-family=\"sans-serif\" font-size=\"12\" fill=\"#333333\">\n";
  svg << "<text x=\"" << fmt2((kLeft + kRight) / 2) << "\" y=\"20\" "
         "text-anchor=\"middle\" font-size=\"14\">accuracy over "
         "class increments</text>\n";

  // grid and axis labels
  for (int i = 0; i <= 5; ++i) {
    const double acc = 0.2 * i;
    const double y = y_at(acc);
    svg << "<line x1=\"" << fmt2(kLeft) << "\" y1=\"" << fmt2(y) << "\" x2=\""
        << fmt2(kRight) << "\" y2=\"" << fmt2(y)
        << "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
    svg << "<text x=\"" << fmt2(kLeft - 8) << "\" y=\"" << fmt2(y + 4)
        << "\" text-anchor=\"end\">" << fmt2(acc) << "</text>\n";
  }
  const std::size_t step = std::max<std::size_t>(1, max_records / 8);
  for (std::size_t t = 0; t < max_records; t += step) {
    const double x = x_at(t);
    svg << "<line x1=\"" << fmt2(x) << "\" y1=\"" << fmt2(kBottom)
        << "\" x2=\"" << fmt2(x) << "\" y2=\"" << fmt2(kBottom + 5)
        << "\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
    svg << "<text x=\"" << fmt2(x) << "\" y=\"" << fmt2(kBottom + 20)
        << "\" text-anchor=\"middle\">" << t << "</text>\n";
  }
  svg << "<line x1=\"" << fmt2(kLeft) << "\" y1=\"" << fmt2(kTop) << "\" x2=\""
      << fmt2(kLeft) << "\" y2=\"" << fmt2(kBottom)
      << "\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
  svg << "<line x1=\"" << fmt2(kLeft) << "\" y1=\"" << fmt2(kBottom)
      << "\" x2=\"" << fmt2(kRight) << "\" y2=\"" << fmt2(kBottom)
      << "\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
  svg << "<text x=\"" << fmt2((kLeft + kRight) / 2) << "\" y=\""
      << fmt2(kHeight - 14) << "\" text-anchor=\"middle\">iteration</text>\n";
  svg << "<text x=\"18\" y=\"" << fmt2(kTop - 10) << "\">accuracy</text>\n";

  // +-1 std bands, then mean lines on top
  for (std::size_t ci = 0; ci < agg.curves.size(); ++ci) {
    const auto& c = agg.curves[ci];
    if (c.mean.size() < 2) continue;
    const std::string color = strategy_color(c.strategy, ci);
    svg << "<polygon points=\"";
    for (std::size_t t = 0; t < c.mean.size(); ++t) {
      svg << fmt2(x_at(t)) << ","
          << fmt2(y_at(std::min(1.0, c.mean[t] + c.stddev[t]))) << " ";
    }
    for (std::size_t t = c.mean.size(); t-- > 0;) {
      svg << fmt2(x_at(t)) << ","
          << fmt2(y_at(std::max(0.0, c.mean[t] - c.stddev[t])));
      if (t != 0) svg << " ";
    }
    svg << "\" fill=\"" << color << "\" fill-opacity=\"0.15\"/>\n";
  }
  for (std::size_t ci = 0; ci < agg.curves.size(); ++ci) {
    const auto& c = agg.curves[ci];
    const std::string color = strategy_color(c.strategy, ci);
    svg << "<polyline points=\"";
    for (std::size_t t = 0; t < c.mean.size(); ++t) {
      if (t != 0) svg << " ";
      svg << fmt2(x_at(t)) << "," << fmt2(y_at(c.mean[t]));
    }
    svg << "\" fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"2\"/>\n";
  }

  // legend
  for (std::size_t ci = 0; ci < agg.curves.size(); ++ci) {
    const auto& c = agg.curves[ci];
    const std::string color = strategy_color(c.strategy, ci);
    const double y = kTop + 16 + 22 * static_cast<double>(ci);
    svg << "<line x1=\"" << fmt2(kRight + 16) << "\" y1=\"" << fmt2(y)
        << "\" x2=\"" << fmt2(kRight + 44) << "\" y2=\"" << fmt2(y)
        << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    svg << "<text x=\"" << fmt2(kRight + 50) << "\" y=\"" << fmt2(y + 4)
        << "\">" << c.strategy << " (n=" << c.n << ")</text>\n";
  }
  svg << "</g>\n</svg>\n";
  return svg.str();
}

void emit(const std::vector<RunResult>& results, const AggregateResult& agg,
          const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir);
  const std::filesystem::path base(dir);

  write_results_csv(results, (base / "results.csv").string());

  std::ostringstream summary;
  csv::write_row(summary, {"strategy", "iteration", "mean", "std", "n"});
  for (const auto& c : agg.curves) {
    for (std::size_t t = 0; t < c.mean.size(); ++t) {
      csv::write_row(summary,
                     {c.strategy, std::to_string(t), fmt17(c.mean[t]),
                      fmt17(c.stddev[t]), std::to_string(c.n)});
    }
  }
  csv::write_file(base / "summary.csv", summary.str());

  csv::write_file(base / "curves.svg", render_curves_svg(agg));
}

// ---------------------------------------------------------------------------
// CLI.

namespace {

Corpus cli_load_corpus(const std::string& path, const std::string& format) {
  auto f = parse_dataset_format(format);
  if (!f) throw ValidationError("unknown dataset format '" + format + "'");
  return load_dataset(path, *f);
}

int cli_synth(const std::string& out, const SyntheticSpec& spec,
              std::uint64_t seed) {
  Corpus corpus = synthesize(spec, seed);
  save_csv(corpus, out);
  std::cout << "wrote " << corpus.documents().size() << " documents ("
            << corpus.num_classes() << " classes) to " << out << "\n";
  return 0;
}

int cli_embed(const std::string& data, const std::string& format,
              const std::string& out, const SgnsConfig& sgns) {
  Corpus corpus = cli_load_corpus(data, format);
  std::cout << "corpus: " << corpus.documents().size() << " documents, "
            << corpus.total_tokens() << " tokens, vocabulary "
            << corpus.vocab_size() << "\n";
  EmbeddingTable table = train_sgns(corpus, sgns);
  save_embeddings(table, corpus, out);
  std::cout << "wrote " << table.vectors.rows() << " vectors (dim "
            << table.dim << ") to " << out << "\n";
  return 0;
}

int cli_matrix(const std::string& data, const std::string& format,
               const std::string& metric, const std::string& embeddings,
               const std::string& wordnet, int top_k, const std::string& out) {
  Corpus corpus = cli_load_corpus(data, format);
  const CorpusView view = full_view(corpus);
  AdjacencyMatrix adj;
  if (metric == "wu-palmer") {
    ExperimentConfig cfg;
    cfg.metric = metric;
    cfg.wordnet_dir = wordnet;
    cfg.tfidf_top_k = top_k;
    adj = build_ordering_matrix(cfg, view, EmbeddingTable{}, &std::cout);
  } else if (metric == "cosine" || metric == "euclidean") {
    if (embeddings.empty()) {
      throw ValidationError("the " + metric + " metric requires --embeddings");
    }
    EmbeddingTable table = load_pretrained(embeddings, corpus);
    if (table.missing_words > 0) {
      std::cout << "warning: " << table.missing_words
                << " vocabulary words missing from " << embeddings << "\n";
    }
    std::vector<ClassExemplar> exemplars;
    for (int c = 0; c < corpus.num_classes(); ++c) {
      exemplars.push_back(class_exemplar(c, view, table));
    }
    adj = associative_matrix(exemplars, metric == "cosine"
                                            ? AssocMetric::cosine
                                            : AssocMetric::euclidean);
  } else {
    throw ValidationError("unknown metric '" + metric + "'");
  }
  save_matrix_csv(adj, corpus.class_names(), out);
  std::cout << "wrote " << corpus.num_classes() << "x" << corpus.num_classes()
            << " " << metric << " matrix to " << out << "\n";
  return 0;
}

int cli_order(const std::string& matrix_path, const std::string& strategy_name_,
              std::uint64_t seed, const std::string& prefix_csv) {
  auto strategy = parse_strategy(strategy_name_);
  if (!strategy) {
    throw ValidationError("unknown strategy '" + strategy_name_ + "'");
  }
  std::vector<std::string> class_names;
  AdjacencyMatrix adj = load_matrix_csv(matrix_path, &class_names);

  std::vector<int> prefix;
  if (!prefix_csv.empty()) {
    std::istringstream parts(prefix_csv);
    std::string part;
    while (std::getline(parts, part, ',')) {
      auto it = std::find(class_names.begin(), class_names.end(), trim(part));
      if (it == class_names.end()) {
        throw ValidationError("prefix class '" + trim(part) +
                              "' not in the matrix");
      }
      prefix.push_back(static_cast<int>(it - class_names.begin()));
    }
  }

  ClassOrder order;
  switch (*strategy) {
    case Strategy::interleaved:
    case Strategy::block:
      order = prefix.empty() ? (*strategy == Strategy::interleaved
                                    ? interleaved_order(adj)
                                    : block_order(adj))
                             : extend_order(adj, prefix, *strategy);
      break;
    case Strategy::random: {
      std::vector<int> ids(class_names.size());
      for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<int>(i);
      order = random_order(ids, prefix, seed);
      break;
    }
  }
  std::cout << order_to_json(order, class_names).dump(2) << "\n";
  return 0;
}

int cli_run(const std::string& config_path) {
  ExperimentConfig cfg = ExperimentConfig::from_file(config_path);
  std::vector<RunResult> results = run(cfg);
  AggregateResult agg = aggregate(results);
  emit(results, agg, cfg.output_dir);
  for (const auto& c : agg.curves) {
    double curve_mean = 0.0;
    for (double v : c.mean) curve_mean += v;
    curve_mean /= static_cast<double>(c.mean.size());
    std::cout << c.strategy << ": final mean accuracy " << fmt2(c.mean.back())
              << ", curve average " << fmt2(curve_mean) << " (n=" << c.n
              << ")\n";
  }
  std::cout << "wrote results.csv, summary.csv, curves.svg to "
            << cfg.output_dir << "\n";
  return 0;
}

int cli_plot(const std::string& results_path, const std::string& out) {
  std::vector<RunResult> results = read_results_csv(results_path);
  AggregateResult agg = aggregate(results);
  csv::write_file(out, render_curves_svg(agg));
  std::cout << "wrote " << out << "\n";
  return 0;
}

}  // namespace

int cli_main(int argc, char** argv) {
  CLI::App app{"class-ordering toolkit for incremental text classification"};
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand("synth", "generate the synthetic corpus");
  std::string synth_out;
  SyntheticSpec spec;
  std::uint64_t synth_seed = 7;
  synth->add_option("--out", synth_out, "output CSV path")->required();
  synth->add_option("--classes", spec.n_classes, "number of classes");
  synth->add_option("--groups", spec.n_topic_groups, "number of topic groups");
  synth->add_option("--docs-per-class", spec.docs_per_class, "documents per class");
  synth->add_option("--doc-length", spec.doc_length, "tokens per document");
  synth->add_option("--vocab-per-topic", spec.vocab_per_topic,
                    "vocabulary words per topic group");
  synth->add_option("--overlap", spec.overlap_fraction,
                    "cross-group shared-vocabulary fraction");
  synth->add_option("--seed", synth_seed, "generator seed");

  // embed
  auto* embed = app.add_subcommand("embed", "train and save word embeddings");
  std::string embed_data, embed_format = "csv", embed_out;
  SgnsConfig sgns;
  embed->add_option("--data", embed_data, "dataset path")->required();
  embed->add_option("--format", embed_format, "csv | jsonl | dir");
  embed->add_option("--out", embed_out, "output vectors path")->required();
  embed->add_option("--dim", sgns.dim, "embedding dimension");
  embed->add_option("--window", sgns.window, "context window");
  embed->add_option("--negatives", sgns.negatives, "negative samples");
  embed->add_option("--epochs", sgns.epochs, "training epochs");
  embed->add_option("--lr", sgns.learning_rate, "initial learning rate");
  embed->add_option("--min-count", sgns.min_count, "minimum word frequency");
  embed->add_option("--subsample", sgns.subsample_threshold,
                    "frequent-word subsampling threshold");
  embed->add_option("--seed", sgns.seed, "training seed");

  // matrix
  auto* matrix = app.add_subcommand("matrix", "compute a class adjacency matrix");
  std::string mat_data, mat_format = "csv", mat_metric = "cosine";
  std::string mat_embeddings, mat_wordnet, mat_out;
  int mat_top_k = 10;
  matrix->add_option("--data", mat_data, "dataset path")->required();
  matrix->add_option("--format", mat_format, "csv | jsonl | dir");
  matrix->add_option("--metric", mat_metric, "cosine | euclidean | wu-palmer");
  matrix->add_option("--embeddings", mat_embeddings,
                     "saved embeddings (cosine/euclidean)");
  matrix->add_option("--wordnet", mat_wordnet, "wordnet database directory");
  matrix->add_option("--top-k", mat_top_k, "tf-idf words per class (wu-palmer)");
  matrix->add_option("--out", mat_out, "output matrix CSV path")->required();

  // order
  auto* order = app.add_subcommand("order", "compute a class ordering");
  std::string ord_matrix, ord_strategy = "interleaved", ord_prefix;
  std::uint64_t ord_seed = 1;
  order->add_option("--matrix", ord_matrix, "adjacency matrix CSV")->required();
  order->add_option("--strategy", ord_strategy, "interleaved | block | random");
  order->add_option("--seed", ord_seed, "shuffle seed (random strategy)");
  order->add_option("--prefix", ord_prefix,
                    "comma-separated class names fixed at the front");

  // run
  auto* run_cmd = app.add_subcommand("run", "run the full experiment");
  std::string run_config;
  run_cmd->add_option("--config", run_config, "experiment config (JSON or key=value)")
      ->required();

  // plot
  auto* plot = app.add_subcommand("plot", "re-render curves.svg from results.csv");
  std::string plot_results, plot_out = "curves.svg";
  plot->add_option("--results", plot_results, "results.csv path")->required();
  plot->add_option("--out", plot_out, "output SVG path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (synth->parsed()) return cli_synth(synth_out, spec, synth_seed);
    if (embed->parsed()) return cli_embed(embed_data, embed_format, embed_out, sgns);
    if (matrix->parsed()) {
      return cli_matrix(mat_data, mat_format, mat_metric, mat_embeddings,
                        mat_wordnet, mat_top_k, mat_out);
    }
    if (order->parsed()) return cli_order(ord_matrix, ord_strategy, ord_seed, ord_prefix);
    if (run_cmd->parsed()) return cli_run(run_config);
    if (plot->parsed()) return cli_plot(plot_results, plot_out);
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return 2;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const FormatError& e) {
    std::cerr << "format error: " << e.what() << "\n";
    return 1;
  } catch (const TrainingError& e) {
    std::cerr << "training error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace primer
