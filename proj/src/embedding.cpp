#include "primer/embedding.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "primer/error.hpp"
#include "primer/rng.hpp"

namespace primer {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Word-id table where each id appears proportionally to count^0.75.
std::vector<int> build_unigram_table(const std::vector<double>& weights,
                                     std::size_t table_size) {
  std::vector<int> table(table_size);
  double total = 0.0;
  for (double w : weights) total += w;
  std::size_t i = 0;
  double cum = weights.empty() ? 0.0 : weights[0] / total;
  for (std::size_t j = 0; j < table_size; ++j) {
    table[j] = static_cast<int>(i);
    if (static_cast<double>(j + 1) / static_cast<double>(table_size) > cum &&
        i + 1 < weights.size()) {
      ++i;
      cum += weights[i] / total;
    }
  }
  return table;
}

}  // namespace

double sgns_example_loss(const Vector& center, const Vector& context,
                         const Matrix& negatives) {
  double loss = -std::log(sigmoid(center.dot(context)));
  for (Eigen::Index n = 0; n < negatives.rows(); ++n)
    loss -= std::log(sigmoid(-center.dot(negatives.row(n))));
  return loss;
}

SgnsExampleGrad sgns_example_grad(const Vector& center, const Vector& context,
                                  const Matrix& negatives) {
  SgnsExampleGrad g;
  const double gpos = sigmoid(center.dot(context)) - 1.0;  // dL/ds for label 1
  g.center = gpos * context;
  g.context = gpos * center;
  g.negatives.resize(negatives.rows(), negatives.cols());
  for (Eigen::Index n = 0; n < negatives.rows(); ++n) {
    const double gneg = sigmoid(center.dot(negatives.row(n)));  // label 0
    g.center += gneg * negatives.row(n).transpose();
    g.negatives.row(n) = gneg * center.transpose();
  }
  return g;
}

namespace {

// One SGD step on a (center, context, negatives) example, same math as
// sgns_example_grad but applied in place on the weight rows.
void sgns_step(Matrix& w_in, Matrix& w_out, int center, int context,
               const std::vector<int>& negatives, double lr,
               Vector& center_grad) {
  auto c = w_in.row(center);
  center_grad.setZero();
  const double gpos = sigmoid(c.dot(w_out.row(context))) - 1.0;
  center_grad += gpos * w_out.row(context).transpose();
  w_out.row(context) -= lr * gpos * c;
  for (int n : negatives) {
    const double gneg = sigmoid(c.dot(w_out.row(n)));
    center_grad += gneg * w_out.row(n).transpose();
    w_out.row(n) -= lr * gneg * c;
  }
  w_in.row(center) -= lr * center_grad.transpose();
}

}  // namespace

EmbeddingTable train_sgns(const Corpus& corpus, const SgnsConfig& config) {
  if (corpus.documents().empty())
    throw ValidationError("train_sgns: corpus has no documents");
  if (config.dim < 2) throw ValidationError("train_sgns: dim must be >= 2");
  if (config.window < 1) throw ValidationError("train_sgns: window must be >= 1");
  if (config.negatives < 1)
    throw ValidationError("train_sgns: negatives must be >= 1");
  if (!(config.learning_rate > 0.0))
    throw ValidationError("train_sgns: learning_rate must be > 0");
  if (config.epochs < 0) throw ValidationError("train_sgns: epochs must be >= 0");

  const int v = corpus.vocab_size();
  Rng rng(config.seed);

  EmbeddingTable table;
  table.dim = config.dim;
  table.source = EmbeddingTable::Source::trained;
  table.vectors.resize(v, config.dim);
  for (int i = 0; i < v; ++i)
    for (int j = 0; j < config.dim; ++j)
      table.vectors(i, j) = (rng.next_double() - 0.5) / config.dim;

  std::vector<bool> trainable(v);
  std::int64_t stream_tokens = 0;
  int n_trainable = 0;
  for (int w = 0; w < v; ++w) {
    trainable[w] = corpus.word_frequency(w) >= config.min_count;
    if (trainable[w]) {
      ++n_trainable;
      stream_tokens += corpus.word_frequency(w);
    }
  }
  if (n_trainable == 0)
    throw ValidationError("train_sgns: min_count=" +
                          std::to_string(config.min_count) +
                          " filters out the entire vocabulary");
  table.has_vector.assign(trainable.begin(), trainable.end());
  if (config.epochs == 0) return table;

  Matrix w_out = Matrix::Zero(v, config.dim);

  std::vector<double> ns_weights(v, 0.0);
  for (int w = 0; w < v; ++w)
    if (trainable[w])
      ns_weights[w] = std::pow(static_cast<double>(corpus.word_frequency(w)), 0.75);
  constexpr std::size_t kTableSize = 1u << 20;
  const std::vector<int> unigram = build_unigram_table(ns_weights, kTableSize);

  const double total_planned =
      static_cast<double>(config.epochs) * static_cast<double>(stream_tokens);
  const double total_count = static_cast<double>(corpus.total_tokens());
  std::int64_t processed = 0;

  std::vector<int> sent;
  std::vector<int> negatives;
  Vector center_grad(config.dim);
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    for (const Document& doc : corpus.documents()) {
      const double lr =
          config.learning_rate *
          std::max(1.0 - static_cast<double>(processed) / total_planned, 1e-4);

      sent.clear();
      for (int w : doc.tokens) {
        if (!trainable[w]) continue;
        ++processed;
        if (config.subsample_threshold > 0.0) {
          const double f =
              static_cast<double>(corpus.word_frequency(w)) / total_count;
          const double keep =
              (std::sqrt(f / config.subsample_threshold) + 1.0) *
              config.subsample_threshold / f;
          if (keep < 1.0 && rng.next_double() >= keep) continue;
        }
        sent.push_back(w);
      }

      const int len = static_cast<int>(sent.size());
      for (int pos = 0; pos < len; ++pos) {
        const int win =
            config.window - static_cast<int>(rng.below(config.window));
        for (int off = -win; off <= win; ++off) {
          if (off == 0) continue;
          const int j = pos + off;
          if (j < 0 || j >= len) continue;
          negatives.clear();
          for (int n = 0; n < config.negatives; ++n) {
            const int target = unigram[rng.below(kTableSize)];
            if (target == sent[j]) continue;
            negatives.push_back(target);
          }
          sgns_step(table.vectors, w_out, sent[pos], sent[j], negatives, lr,
                    center_grad);
        }
      }
    }
    if (!table.vectors.allFinite() || !w_out.allFinite())
      throw TrainingError("train_sgns: non-finite vectors after epoch " +
                          std::to_string(epoch));
  }
  return table;
}

namespace {

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

}  // namespace

void save_embeddings(const EmbeddingTable& table, const Corpus& vocabulary,
                     const std::filesystem::path& path) {
  if (vocabulary.vocab_size() != table.vectors.rows())
    throw ValidationError("save_embeddings: table/vocabulary size mismatch");
  std::ofstream out(path);
  if (!out) throw IoError("cannot write file: " + path.string());
  out << table.vectors.rows() << ' ' << table.dim << '\n';
  for (Eigen::Index i = 0; i < table.vectors.rows(); ++i) {
    out << vocabulary.word(static_cast<int>(i));
    for (int j = 0; j < table.dim; ++j)
      out << ' ' << format_double(table.vectors(i, j));
    out << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

EmbeddingTable load_pretrained(const std::filesystem::path& path,
                               const Corpus& vocabulary) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open file: " + path.string());

  EmbeddingTable table;
  table.source = EmbeddingTable::Source::loaded;
  table.dim = -1;
  table.has_vector.assign(vocabulary.vocab_size(), false);

  std::string line;
  int line_no = 0;
  bool first_content_line = true;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ss(line);
    std::vector<std::string> fields;
    std::string tok;
    while (ss >> tok) fields.push_back(tok);
    if (fields.empty()) continue;

    if (first_content_line && fields.size() == 2) {
      // "V d" header; dim is still inferred from the first data row and
      // checked against it.
      char* end = nullptr;
      const long hd = std::strtol(fields[1].c_str(), &end, 10);
      if (end && *end == '\0' && hd > 0) {
        const long hv = std::strtol(fields[0].c_str(), &end, 10);
        if (end && *end == '\0' && hv >= 0) {
          table.dim = static_cast<int>(hd);
          first_content_line = false;
          continue;
        }
      }
    }
    first_content_line = false;

    if (table.dim < 0) table.dim = static_cast<int>(fields.size()) - 1;
    if (static_cast<int>(fields.size()) != table.dim + 1)
      throw FormatError(path.string() + ": line " + std::to_string(line_no) +
                        ": expected " + std::to_string(table.dim) +
                        " values, got " + std::to_string(fields.size() - 1));
    if (table.vectors.size() == 0)
      table.vectors = Matrix::Zero(vocabulary.vocab_size(), table.dim);

    const auto wid = vocabulary.word_id(fields[0]);
    if (!wid) continue;
    for (int j = 0; j < table.dim; ++j) {
      char* end = nullptr;
      const double val = std::strtod(fields[j + 1].c_str(), &end);
      if (!end || *end != '\0' || !std::isfinite(val))
        throw FormatError(path.string() + ": line " + std::to_string(line_no) +
                          ": bad value '" + fields[j + 1] + "'");
      table.vectors(*wid, j) = val;
    }
    table.has_vector[*wid] = true;
  }
  if (table.dim <= 0)
    throw FormatError(path.string() + ": no embedding rows found");
  if (table.vectors.size() == 0)
    table.vectors = Matrix::Zero(vocabulary.vocab_size(), table.dim);
  for (bool h : table.has_vector)
    if (!h) ++table.missing_words;
  return table;
}

Vector doc_vector(const Document& doc, const EmbeddingTable& table,
                  bool* all_oov) {
  Vector sum = Vector::Zero(table.dim);
  int count = 0;
  for (int w : doc.tokens) {
    if (w < 0 || w >= static_cast<int>(table.has_vector.size()) ||
        !table.has_vector[w])
      continue;
    sum += table.vectors.row(w);
    ++count;
  }
  if (all_oov) *all_oov = (count == 0);
  if (count == 0) return sum;
  return sum / count;
}

}  // namespace primer
