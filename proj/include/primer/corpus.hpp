#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace primer {

struct Document {
  std::vector<int> tokens;  // dense vocabulary ids
  std::string raw_text;
  int class_id = -1;
};

/// Immutable labeled text collection with a dense class registry and a dense
/// vocabulary (first-seen order for both).
class Corpus {
 public:
  const std::vector<Document>& documents() const { return documents_; }

  int num_classes() const { return static_cast<int>(class_names_.size()); }
  const std::string& class_name(int id) const { return class_names_.at(id); }
  const std::vector<std::string>& class_names() const { return class_names_; }
  std::optional<int> class_id(const std::string& name) const;

  int vocab_size() const { return static_cast<int>(words_.size()); }
  const std::string& word(int id) const { return words_.at(id); }
  std::optional<int> word_id(const std::string& w) const;
  std::int64_t word_frequency(int id) const { return frequencies_.at(id); }
  std::int64_t total_tokens() const { return total_tokens_; }

  /// Documents dropped at build time because they tokenized to nothing.
  int dropped_empty() const { return dropped_empty_; }

  /// Builds a corpus from (raw_text, label) records: tokenizes, assigns class
  /// and word ids in first-seen order, drops empty-token documents.
  static Corpus from_records(
      const std::vector<std::pair<std::string, std::string>>& records);

 private:
  std::vector<Document> documents_;
  std::vector<std::string> class_names_;
  std::unordered_map<std::string, int> class_ids_;
  std::vector<std::string> words_;
  std::unordered_map<std::string, int> word_ids_;
  std::vector<std::int64_t> frequencies_;
  std::int64_t total_tokens_ = 0;
  int dropped_empty_ = 0;
};

/// Read-only subset of a corpus, by document index. Train/test splits are
/// views; class registry and vocabulary stay those of the base corpus.
class CorpusView {
 public:
  CorpusView() = default;
  CorpusView(const Corpus& base, std::vector<int> doc_indices);

  const Corpus& base() const { return *base_; }
  const std::vector<int>& doc_indices() const { return doc_indices_; }
  std::size_t size() const { return doc_indices_.size(); }
  const Document& doc(std::size_t i) const {
    return base_->documents()[doc_indices_[i]];
  }
  std::vector<int> docs_of_class(int class_id) const;

 private:
  const Corpus* base_ = nullptr;
  std::vector<int> doc_indices_;
};

CorpusView full_view(const Corpus& corpus);

struct SplitCorpus {
  CorpusView train;
  CorpusView test;
  std::uint64_t split_seed = 0;
  double train_fraction = 0.0;
};

enum class DatasetFormat { csv, jsonl, dir_per_class };

std::optional<DatasetFormat> parse_dataset_format(std::string_view name);

Corpus load_dataset(const std::filesystem::path& path, DatasetFormat format);

/// Lowercases and splits on non-alphanumeric boundaries. UTF-8 aware: ASCII
/// and Latin-1 letters are case-folded, common Unicode punctuation separates,
/// other non-ASCII codepoints count as word characters. Digits are kept.
std::vector<std::string> tokenize(std::string_view raw_text);

SplitCorpus split(const Corpus& corpus, double train_fraction, std::uint64_t seed);

struct SyntheticSpec {
  int n_classes = 12;
  int n_topic_groups = 4;
  int docs_per_class = 100;
  int doc_length = 50;
  int vocab_per_topic = 200;
  double overlap_fraction = 0.05;
};

/// Generates a corpus with planted topic structure: classes in the same topic
/// group draw most of their tokens from a shared group vocabulary, classes in
/// different groups overlap only through a small global vocabulary, and each
/// class keeps a private vocabulary slice so classes stay separable.
Corpus synthesize(const SyntheticSpec& spec, std::uint64_t seed);

/// Topic group of a class under `synthesize` (block assignment).
int topic_group_of(const SyntheticSpec& spec, int class_id);

void save_csv(const Corpus& corpus, const std::filesystem::path& path);

}  // namespace primer
