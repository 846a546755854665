#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "primer/corpus.hpp"
#include "primer/embedding.hpp"
#include "primer/taxonomy.hpp"
#include "primer/types.hpp"

namespace primer {

struct ClassExemplar {
  int class_id = -1;
  Vector vector;
  bool all_oov = false;  // every document of the class was fully OOV
};

enum class ExemplarMode {
  per_document,  // mean of per-document means (default)
  token_pooled,  // mean over all tokens of the class, multiplicities counted
};

ClassExemplar class_exemplar(int class_id, const CorpusView& train,
                             const EmbeddingTable& table,
                             ExemplarMode mode = ExemplarMode::per_document);

struct AdjacencyMatrix {
  enum class Kind { similarity, dissimilarity };
  Matrix values;  // K x K, symmetric
  Kind kind = Kind::similarity;
  std::string metric;  // "cosine" | "euclidean" | "wu-palmer"
  std::vector<int> class_ids;
};

/// Checks symmetry (1e-9), the kind-correct diagonal and metric value ranges.
void validate_adjacency(const AdjacencyMatrix& m);

enum class AssocMetric { cosine, euclidean };

AdjacencyMatrix associative_matrix(const std::vector<ClassExemplar>& exemplars,
                                   AssocMetric metric);

struct TopWords {
  int class_id = -1;
  std::vector<std::pair<std::string, double>> words;  // scores non-increasing
};

/// Top-k tf-idf words per class, the class treated as one pseudo-document:
/// tf = count/class tokens, idf = ln(K/df), ties broken lexicographically.
std::vector<TopWords> tfidf_top_words(const CorpusView& train, int k);

enum class SenseStrategy { first, max_pair };

struct SemanticMatrixResult {
  AdjacencyMatrix matrix;
  std::int64_t total_pairs = 0;    // word pairs over all class pairs a<b
  std::int64_t skipped_pairs = 0;  // pairs where either word has no synset
  // class pairs with zero usable word pairs (their similarity is 0)
  std::vector<std::pair<int, int>> uncovered_class_pairs;
  double skipped_fraction() const {
    return total_pairs == 0 ? 0.0
                            : static_cast<double>(skipped_pairs) /
                                  static_cast<double>(total_pairs);
  }
};

/// Mean Wu-Palmer similarity between the two classes' top-word synsets; word
/// pairs without synsets on both sides are skipped and counted. Diagonal is
/// forced to 1.
SemanticMatrixResult semantic_matrix(const std::vector<TopWords>& top_words,
                                     const Taxonomy& taxonomy,
                                     SenseStrategy strategy = SenseStrategy::first);

/// CSV layout: "# kind=<...> metric=<...>" metadata line, a header row of
/// class names, then K rows of K values.
void save_matrix_csv(const AdjacencyMatrix& m,
                     const std::vector<std::string>& class_names,
                     const std::filesystem::path& path);

AdjacencyMatrix load_matrix_csv(const std::filesystem::path& path,
                                std::vector<std::string>* class_names = nullptr);

}  // namespace primer
