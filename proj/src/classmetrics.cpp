#include "primer/classmetrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "primer/csv.hpp"
#include "primer/error.hpp"

namespace primer {

ClassExemplar class_exemplar(int class_id, const CorpusView& train,
                             const EmbeddingTable& table, ExemplarMode mode) {
  const std::vector<int> docs = train.docs_of_class(class_id);
  if (docs.empty())
    throw ValidationError("class_exemplar: class " + std::to_string(class_id) +
                          " has no training documents");

  ClassExemplar ex;
  ex.class_id = class_id;
  ex.vector = Vector::Zero(table.dim);
  ex.all_oov = true;

  if (mode == ExemplarMode::per_document) {
    for (int idx : docs) {
      bool oov = false;
      ex.vector += doc_vector(train.base().documents()[idx], table, &oov);
      if (!oov) ex.all_oov = false;
    }
    ex.vector /= static_cast<double>(docs.size());
  } else {
    std::int64_t count = 0;
    for (int idx : docs) {
      for (int w : train.base().documents()[idx].tokens) {
        if (w < 0 || w >= static_cast<int>(table.has_vector.size()) ||
            !table.has_vector[w])
          continue;
        ex.vector += table.vectors.row(w);
        ++count;
      }
    }
    if (count > 0) {
      ex.vector /= static_cast<double>(count);
      ex.all_oov = false;
    }
  }
  return ex;
}

void validate_adjacency(const AdjacencyMatrix& m) {
  const auto k = m.values.rows();
  if (k != m.values.cols() || k < 2)
    throw ValidationError("adjacency matrix must be square with K >= 2");
  if (static_cast<std::size_t>(k) != m.class_ids.size())
    throw ValidationError("adjacency matrix class_ids size mismatch");
  const double diag =
      m.kind == AdjacencyMatrix::Kind::similarity ? 1.0 : 0.0;
  for (Eigen::Index i = 0; i < k; ++i) {
    if (std::abs(m.values(i, i) - diag) > 1e-9)
      throw ValidationError("adjacency diagonal must be " +
                            std::to_string(diag));
    for (Eigen::Index j = i + 1; j < k; ++j)
      if (std::abs(m.values(i, j) - m.values(j, i)) > 1e-9)
        throw ValidationError("adjacency matrix not symmetric");
  }
  double lo = -1e308, hi = 1e308;
  if (m.metric == "cosine")
    lo = m.kind == AdjacencyMatrix::Kind::similarity ? -1.0 : 0.0,
    hi = m.kind == AdjacencyMatrix::Kind::similarity ? 1.0 : 2.0;
  else if (m.metric == "wu-palmer")
    lo = 0.0, hi = 1.0;
  else if (m.metric == "euclidean")
    lo = 0.0;
  const double eps = 1e-12;
  if ((m.values.array() < lo - eps).any() || (m.values.array() > hi + eps).any())
    throw ValidationError("adjacency entries out of range for metric '" +
                          m.metric + "'");
}

AdjacencyMatrix associative_matrix(const std::vector<ClassExemplar>& exemplars,
                                   AssocMetric metric) {
  const auto k = static_cast<Eigen::Index>(exemplars.size());
  if (k < 2)
    throw ValidationError("associative_matrix: need at least 2 exemplars");
  if (metric == AssocMetric::cosine) {
    for (const auto& e : exemplars)
      if (e.vector.norm() == 0.0)
        throw ValidationError(
            "associative_matrix: zero exemplar for class " +
            std::to_string(e.class_id) + " under cosine");
  }

  AdjacencyMatrix m;
  m.kind = metric == AssocMetric::cosine ? AdjacencyMatrix::Kind::similarity
                                         : AdjacencyMatrix::Kind::dissimilarity;
  m.metric = metric == AssocMetric::cosine ? "cosine" : "euclidean";
  for (const auto& e : exemplars) m.class_ids.push_back(e.class_id);
  m.values.resize(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    m.values(i, i) = metric == AssocMetric::cosine ? 1.0 : 0.0;
    for (Eigen::Index j = i + 1; j < k; ++j) {
      const double v =
          metric == AssocMetric::cosine
              ? cosine_similarity(exemplars[i].vector, exemplars[j].vector)
              : euclidean_distance(exemplars[i].vector, exemplars[j].vector);
      m.values(i, j) = v;
      m.values(j, i) = v;
    }
  }
  validate_adjacency(m);
  return m;
}

std::vector<TopWords> tfidf_top_words(const CorpusView& train, int k) {
  if (k < 1) throw ValidationError("tfidf_top_words: k must be >= 1");
  const Corpus& base = train.base();
  const int num_classes = base.num_classes();

  // class pseudo-document counts
  std::vector<std::map<int, std::int64_t>> counts(num_classes);
  std::vector<std::int64_t> totals(num_classes, 0);
  for (std::size_t i = 0; i < train.size(); ++i) {
    const Document& doc = train.doc(i);
    for (int w : doc.tokens) {
      ++counts[doc.class_id][w];
      ++totals[doc.class_id];
    }
  }

  std::map<int, int> df;
  for (int c = 0; c < num_classes; ++c)
    for (const auto& [w, _] : counts[c]) ++df[w];

  std::vector<TopWords> out;
  for (int c = 0; c < num_classes; ++c) {
    TopWords tw;
    tw.class_id = c;
    std::vector<std::pair<std::string, double>> scored;
    for (const auto& [w, cnt] : counts[c]) {
      const double tf =
          static_cast<double>(cnt) / static_cast<double>(totals[c]);
      const double idf =
          std::log(static_cast<double>(num_classes) / df.at(w));
      scored.emplace_back(base.word(w), tf * idf);
    }
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
      if (a.second != b.second) return a.second > b.second;
      return a.first < b.first;
    });
    if (static_cast<int>(scored.size()) > k) scored.resize(k);
    tw.words = std::move(scored);
    out.push_back(std::move(tw));
  }
  return out;
}

SemanticMatrixResult semantic_matrix(const std::vector<TopWords>& top_words,
                                     const Taxonomy& taxonomy,
                                     SenseStrategy strategy) {
  const auto k = static_cast<Eigen::Index>(top_words.size());
  if (k < 2) throw ValidationError("semantic_matrix: need at least 2 classes");

  // similarity of a word pair, or nullopt when either side has no synset
  auto pair_similarity = [&](const std::string& w,
                             const std::string& u) -> std::optional<double> {
    if (strategy == SenseStrategy::first) {
      const auto sw = taxonomy.first_synset(w);
      const auto su = taxonomy.first_synset(u);
      if (!sw || !su) return std::nullopt;
      return taxonomy.wu_palmer(*sw, *su);
    }
    const auto sw = taxonomy.senses(w);
    const auto su = taxonomy.senses(u);
    if (sw.empty() || su.empty()) return std::nullopt;
    double best = 0.0;
    for (SynsetId a : sw)
      for (SynsetId b : su) best = std::max(best, taxonomy.wu_palmer(a, b));
    return best;
  };

  SemanticMatrixResult res;
  res.matrix.kind = AdjacencyMatrix::Kind::similarity;
  res.matrix.metric = "wu-palmer";
  for (const auto& tw : top_words) res.matrix.class_ids.push_back(tw.class_id);
  res.matrix.values = Matrix::Identity(k, k);

  for (Eigen::Index a = 0; a < k; ++a) {
    for (Eigen::Index b = a + 1; b < k; ++b) {
      double sum = 0.0;
      std::int64_t used = 0;
      for (const auto& [w, ws] : top_words[a].words) {
        for (const auto& [u, us] : top_words[b].words) {
          ++res.total_pairs;
          const auto sim = pair_similarity(w, u);
          if (!sim) {
            ++res.skipped_pairs;
            continue;
          }
          sum += *sim;
          ++used;
        }
      }
      double value = 0.0;
      if (used > 0) {
        value = sum / static_cast<double>(used);
      } else {
        res.uncovered_class_pairs.emplace_back(top_words[a].class_id,
                                               top_words[b].class_id);
      }
      res.matrix.values(a, b) = value;
      res.matrix.values(b, a) = value;
    }
  }
  validate_adjacency(res.matrix);
  return res;
}

namespace {

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

}  // namespace

void save_matrix_csv(const AdjacencyMatrix& m,
                     const std::vector<std::string>& class_names,
                     const std::filesystem::path& path) {
  if (class_names.size() != m.class_ids.size())
    throw ValidationError("save_matrix_csv: class name count mismatch");
  std::ostringstream out;
  out << "# kind="
      << (m.kind == AdjacencyMatrix::Kind::similarity ? "similarity"
                                                      : "dissimilarity")
      << " metric=" << m.metric << '\n';
  csv::write_row(out, class_names);
  for (Eigen::Index i = 0; i < m.values.rows(); ++i) {
    std::vector<std::string> row;
    for (Eigen::Index j = 0; j < m.values.cols(); ++j)
      row.push_back(format_double(m.values(i, j)));
    csv::write_row(out, row);
  }
  csv::write_file(path, out.str());
}

AdjacencyMatrix load_matrix_csv(const std::filesystem::path& path,
                                std::vector<std::string>* class_names) {
  const std::string text = csv::read_file(path);

  AdjacencyMatrix m;
  std::string body = text;
  if (text.compare(0, 1, "#") == 0) {
    const auto nl = text.find('\n');
    const std::string meta = text.substr(0, nl);
    body = nl == std::string::npos ? "" : text.substr(nl + 1);
    std::istringstream ss(meta.substr(1));
    std::string tok;
    while (ss >> tok) {
      const auto eq = tok.find('=');
      if (eq == std::string::npos) continue;
      const std::string key = tok.substr(0, eq);
      const std::string val = tok.substr(eq + 1);
      if (key == "kind") {
        if (val == "similarity") m.kind = AdjacencyMatrix::Kind::similarity;
        else if (val == "dissimilarity")
          m.kind = AdjacencyMatrix::Kind::dissimilarity;
        else throw FormatError(path.string() + ": unknown kind '" + val + "'");
      } else if (key == "metric") {
        m.metric = val;
      }
    }
  } else {
    throw FormatError(path.string() + ": missing '# kind=... metric=...' line");
  }

  const auto rows = csv::parse(body);
  if (rows.empty()) throw FormatError(path.string() + ": no header row");
  const std::size_t k = rows[0].size();
  if (rows.size() != k + 1)
    throw FormatError(path.string() + ": expected " + std::to_string(k) +
                      " value rows, got " + std::to_string(rows.size() - 1));
  if (class_names) *class_names = rows[0];
  for (std::size_t i = 0; i < k; ++i)
    m.class_ids.push_back(static_cast<int>(i));
  m.values.resize(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
  for (std::size_t i = 0; i < k; ++i) {
    if (rows[i + 1].size() != k)
      throw FormatError(path.string() + ": row " + std::to_string(i + 2) +
                        " has " + std::to_string(rows[i + 1].size()) +
                        " values, expected " + std::to_string(k));
    for (std::size_t j = 0; j < k; ++j) {
      char* end = nullptr;
      const double v = std::strtod(rows[i + 1][j].c_str(), &end);
      if (!end || *end != '\0')
        throw FormatError(path.string() + ": bad value '" + rows[i + 1][j] +
                          "'");
      m.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
    }
  }
  validate_adjacency(m);
  return m;
}

}  // namespace primer
