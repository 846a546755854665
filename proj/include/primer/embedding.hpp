#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "primer/corpus.hpp"
#include "primer/types.hpp"

namespace primer {

struct SgnsConfig {
  int dim = 64;
  int window = 5;
  int negatives = 5;
  int epochs = 5;
  double learning_rate = 0.025;
  int min_count = 2;
  double subsample_threshold = 1e-3;
  std::uint64_t seed = 1;
};

struct EmbeddingTable {
  enum class Source { trained, loaded };
  int dim = 0;
  Matrix vectors;  // V x dim, row per word id
  // False for words that never received a real vector: below min_count for
  // trained tables, absent from the file for loaded ones. Such words are
  // out-of-vocabulary for document averaging.
  std::vector<bool> has_vector;
  Source source = Source::trained;
  int missing_words = 0;
};

/// Skip-gram with negative sampling, plain SGD with linear learning-rate
/// decay, unigram^(3/4) negative-sampling distribution. Single-threaded and
/// bitwise deterministic for a given corpus, config and seed.
EmbeddingTable train_sgns(const Corpus& corpus, const SgnsConfig& config);

/// Text format: optional "V d" header line, then one "word v1 ... vd" row per
/// word. Vocabulary words absent from the file get a zero vector and are
/// counted in missing_words.
EmbeddingTable load_pretrained(const std::filesystem::path& path,
                               const Corpus& vocabulary);

void save_embeddings(const EmbeddingTable& table, const Corpus& vocabulary,
                     const std::filesystem::path& path);

/// Mean of the vectors of the document's in-vocabulary tokens, multiplicities
/// counted. A document with no in-vocabulary token yields the zero vector and
/// sets *all_oov.
Vector doc_vector(const Document& doc, const EmbeddingTable& table,
                  bool* all_oov = nullptr);

// Loss and gradient of one (center, context, negatives) example:
//   L = -log sigmoid(c.o) - sum_n log sigmoid(-c.n)
// The SGD update applied during training is exactly -lr times this gradient
// (asserted in tests), so checking these functions checks the training step.
double sgns_example_loss(const Vector& center, const Vector& context,
                         const Matrix& negatives);

struct SgnsExampleGrad {
  Vector center;
  Vector context;
  Matrix negatives;
};

SgnsExampleGrad sgns_example_grad(const Vector& center, const Vector& context,
                                  const Matrix& negatives);

}  // namespace primer
