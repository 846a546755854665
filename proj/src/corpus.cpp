#include "primer/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "primer/csv.hpp"
#include "primer/error.hpp"
#include "primer/rng.hpp"

namespace primer {

namespace {

// Decodes one UTF-8 codepoint starting at i; advances i past it. Invalid
// sequences yield U+FFFD and advance one byte.
char32_t decode_utf8(std::string_view s, std::size_t& i) {
  const unsigned char b0 = static_cast<unsigned char>(s[i]);
  if (b0 < 0x80) {
    ++i;
    return b0;
  }
  int len = 0;
  char32_t cp = 0;
  if ((b0 & 0xE0) == 0xC0) {
    len = 2;
    cp = b0 & 0x1F;
  } else if ((b0 & 0xF0) == 0xE0) {
    len = 3;
    cp = b0 & 0x0F;
  } else if ((b0 & 0xF8) == 0xF0) {
    len = 4;
    cp = b0 & 0x07;
  } else {
    ++i;
    return 0xFFFD;
  }
  if (i + len > s.size()) {
    ++i;
    return 0xFFFD;
  }
  for (int k = 1; k < len; ++k) {
    const unsigned char b = static_cast<unsigned char>(s[i + k]);
    if ((b & 0xC0) != 0x80) {
      ++i;
      return 0xFFFD;
    }
    cp = (cp << 6) | (b & 0x3F);
  }
  i += len;
  return cp;
}

void append_utf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

bool is_word_codepoint(char32_t cp) {
  if (cp < 0x80)
    return (cp >= '0' && cp <= '9') || (cp >= 'a' && cp <= 'z') ||
           (cp >= 'A' && cp <= 'Z');
  if (cp >= 0xA0 && cp <= 0xBF) return false;   // Latin-1 punctuation
  if (cp == 0xD7 || cp == 0xF7) return false;   // multiply / divide signs
  if (cp >= 0x2000 && cp <= 0x206F) return false;  // general punctuation
  if (cp == 0xFFFD) return false;
  return true;
}

char32_t fold_case(char32_t cp) {
  if (cp >= 'A' && cp <= 'Z') return cp + 0x20;
  // Latin-1 uppercase letters, skipping the multiplication sign
  if ((cp >= 0xC0 && cp <= 0xD6) || (cp >= 0xD8 && cp <= 0xDE)) return cp + 0x20;
  return cp;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view raw_text) {
  std::vector<std::string> tokens;
  std::string current;
  std::size_t i = 0;
  while (i < raw_text.size()) {
    const char32_t cp = decode_utf8(raw_text, i);
    if (is_word_codepoint(cp)) {
      append_utf8(current, fold_case(cp));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

std::optional<int> Corpus::class_id(const std::string& name) const {
  auto it = class_ids_.find(name);
  if (it == class_ids_.end()) return std::nullopt;
  return it->second;
}

std::optional<int> Corpus::word_id(const std::string& w) const {
  auto it = word_ids_.find(w);
  if (it == word_ids_.end()) return std::nullopt;
  return it->second;
}

Corpus Corpus::from_records(
    const std::vector<std::pair<std::string, std::string>>& records) {
  Corpus c;
  std::vector<std::int64_t> docs_per_class;
  for (const auto& [text, label] : records) {
    int cls;
    auto it = c.class_ids_.find(label);
    if (it == c.class_ids_.end()) {
      cls = static_cast<int>(c.class_names_.size());
      c.class_ids_.emplace(label, cls);
      c.class_names_.push_back(label);
      docs_per_class.push_back(0);
    } else {
      cls = it->second;
    }

    const std::vector<std::string> words = tokenize(text);
    if (words.empty()) {
      ++c.dropped_empty_;
      continue;
    }
    Document doc;
    doc.raw_text = text;
    doc.class_id = cls;
    doc.tokens.reserve(words.size());
    for (const std::string& w : words) {
      int wid;
      auto wit = c.word_ids_.find(w);
      if (wit == c.word_ids_.end()) {
        wid = static_cast<int>(c.words_.size());
        c.word_ids_.emplace(w, wid);
        c.words_.push_back(w);
        c.frequencies_.push_back(0);
      } else {
        wid = wit->second;
      }
      ++c.frequencies_[wid];
      doc.tokens.push_back(wid);
    }
    c.total_tokens_ += static_cast<std::int64_t>(doc.tokens.size());
    ++docs_per_class[cls];
    c.documents_.push_back(std::move(doc));
  }

  for (std::size_t k = 0; k < docs_per_class.size(); ++k) {
    if (docs_per_class[k] == 0)
      throw ValidationError("class '" + c.class_names_[k] +
                            "' has zero documents after tokenization");
  }
  if (c.num_classes() < 2)
    throw ValidationError("corpus needs at least 2 classes, got " +
                          std::to_string(c.num_classes()));
  return c;
}

CorpusView::CorpusView(const Corpus& base, std::vector<int> doc_indices)
    : base_(&base), doc_indices_(std::move(doc_indices)) {}

std::vector<int> CorpusView::docs_of_class(int class_id) const {
  std::vector<int> out;
  for (int idx : doc_indices_)
    if (base_->documents()[idx].class_id == class_id) out.push_back(idx);
  return out;
}

CorpusView full_view(const Corpus& corpus) {
  std::vector<int> all(corpus.documents().size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
  return CorpusView(corpus, std::move(all));
}

std::optional<DatasetFormat> parse_dataset_format(std::string_view name) {
  if (name == "csv") return DatasetFormat::csv;
  if (name == "jsonl") return DatasetFormat::jsonl;
  if (name == "dir" || name == "dir-per-class") return DatasetFormat::dir_per_class;
  return std::nullopt;
}

namespace {

Corpus load_csv(const std::filesystem::path& path) {
  const auto rows = csv::parse_file(path);
  if (rows.empty()) throw FormatError(path.string() + ": empty csv");
  if (rows[0].size() != 2 || rows[0][0] != "text" || rows[0][1] != "label") {
    std::string got;
    for (std::size_t i = 0; i < rows[0].size(); ++i)
      got += (i ? "," : "") + rows[0][i];
    throw FormatError(path.string() + ": header must be 'text,label', got '" +
                      got + "'");
  }
  std::vector<std::pair<std::string, std::string>> records;
  records.reserve(rows.size() - 1);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].size() != 2)
      throw FormatError(path.string() + ": row " + std::to_string(r + 1) +
                        " has " + std::to_string(rows[r].size()) +
                        " fields, expected 2");
    records.emplace_back(rows[r][0], rows[r][1]);
  }
  return Corpus::from_records(records);
}

Corpus load_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open file: " + path.string());
  std::vector<std::pair<std::string, std::string>> records;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw FormatError(path.string() + ": line " + std::to_string(line_no) +
                        ": invalid json (" + std::string(e.what()) + ")");
    }
    for (const char* field : {"text", "label"}) {
      if (!obj.contains(field) || !obj[field].is_string())
        throw FormatError(path.string() + ": line " + std::to_string(line_no) +
                          ": missing string field '" + field + "'");
    }
    records.emplace_back(obj["text"].get<std::string>(),
                         obj["label"].get<std::string>());
  }
  return Corpus::from_records(records);
}

Corpus load_dir(const std::filesystem::path& root) {
  std::vector<std::filesystem::path> class_dirs;
  for (const auto& entry : std::filesystem::directory_iterator(root))
    if (entry.is_directory()) class_dirs.push_back(entry.path());
  std::sort(class_dirs.begin(), class_dirs.end());
  if (class_dirs.empty())
    throw ValidationError(root.string() + ": no class subdirectories");

  std::vector<std::pair<std::string, std::string>> records;
  for (const auto& dir : class_dirs) {
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir))
      if (entry.is_regular_file()) files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    if (files.empty())
      throw ValidationError("class '" + dir.filename().string() +
                            "' has zero documents");
    for (const auto& f : files)
      records.emplace_back(csv::read_file(f), dir.filename().string());
  }
  return Corpus::from_records(records);
}

}  // namespace

Corpus load_dataset(const std::filesystem::path& path, DatasetFormat format) {
  if (!std::filesystem::exists(path))
    throw IoError("dataset path does not exist: " + path.string());
  switch (format) {
    case DatasetFormat::csv: return load_csv(path);
    case DatasetFormat::jsonl: return load_jsonl(path);
    case DatasetFormat::dir_per_class: return load_dir(path);
  }
  throw ValidationError("unknown dataset format");
}

SplitCorpus split(const Corpus& corpus, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw ValidationError("train_fraction must be in (0,1), got " +
                          std::to_string(train_fraction));

  std::vector<std::vector<int>> by_class(corpus.num_classes());
  const auto& docs = corpus.documents();
  for (std::size_t i = 0; i < docs.size(); ++i)
    by_class[docs[i].class_id].push_back(static_cast<int>(i));
  for (int k = 0; k < corpus.num_classes(); ++k) {
    if (by_class[k].size() < 2)
      throw ValidationError("class '" + corpus.class_name(k) +
                            "' has fewer than 2 documents, cannot split");
  }

  Rng rng(seed);
  std::vector<int> train_idx, test_idx;
  for (int k = 0; k < corpus.num_classes(); ++k) {
    auto& idx = by_class[k];
    rng.shuffle(idx);
    const auto n = static_cast<std::int64_t>(idx.size());
    auto n_train = static_cast<std::int64_t>(
        std::llround(train_fraction * static_cast<double>(n)));
    n_train = std::clamp<std::int64_t>(n_train, 1, n - 1);
    train_idx.insert(train_idx.end(), idx.begin(), idx.begin() + n_train);
    test_idx.insert(test_idx.end(), idx.begin() + n_train, idx.end());
  }
  std::sort(train_idx.begin(), train_idx.end());
  std::sort(test_idx.begin(), test_idx.end());

  SplitCorpus out;
  out.train = CorpusView(corpus, std::move(train_idx));
  out.test = CorpusView(corpus, std::move(test_idx));
  out.split_seed = seed;
  out.train_fraction = train_fraction;
  return out;
}

int topic_group_of(const SyntheticSpec& spec, int class_id) {
  return class_id / (spec.n_classes / spec.n_topic_groups);
}

Corpus synthesize(const SyntheticSpec& spec, std::uint64_t seed) {
  if (spec.n_classes < 2)
    throw ValidationError("synthetic spec: need at least 2 classes");
  if (spec.n_topic_groups < 1)
    throw ValidationError("synthetic spec: need at least 1 topic group");
  if (spec.n_classes % spec.n_topic_groups != 0)
    throw ValidationError("synthetic spec: n_classes (" +
                          std::to_string(spec.n_classes) +
                          ") not divisible by n_topic_groups (" +
                          std::to_string(spec.n_topic_groups) + ")");
  if (spec.overlap_fraction < 0.0 || spec.overlap_fraction >= 1.0)
    throw ValidationError("synthetic spec: overlap_fraction must be in [0,1)");
  if (spec.docs_per_class < 1 || spec.doc_length < 1)
    throw ValidationError("synthetic spec: docs_per_class and doc_length must be >= 1");
  if (spec.vocab_per_topic < 4)
    throw ValidationError("synthetic spec: vocab_per_topic must be >= 4");

  auto word_name = [](const std::string& prefix, int i) {
    std::ostringstream ss;
    ss << prefix << i;
    return ss.str();
  };

  const int n_shared =
      spec.overlap_fraction > 0.0
          ? std::max(1, static_cast<int>(std::llround(spec.overlap_fraction *
                                                      spec.vocab_per_topic)))
          : 0;
  std::vector<std::string> shared_vocab;
  for (int i = 0; i < n_shared; ++i)
    shared_vocab.push_back(word_name("shared", i));

  std::vector<std::vector<std::string>> group_vocab(spec.n_topic_groups);
  for (int g = 0; g < spec.n_topic_groups; ++g)
    for (int i = 0; i < spec.vocab_per_topic; ++i)
      group_vocab[g].push_back(word_name("g" + std::to_string(g) + "w", i));

  const int class_vocab_size = std::max(4, spec.vocab_per_topic / 4);
  std::vector<std::vector<std::string>> class_vocab(spec.n_classes);
  for (int c = 0; c < spec.n_classes; ++c)
    for (int i = 0; i < class_vocab_size; ++i)
      class_vocab[c].push_back(word_name("c" + std::to_string(c) + "w", i));

  // Token mass: overlap_fraction goes to the global shared pool; the rest
  // splits 60/40 between the group pool and the class-private pool.
  const double p_shared = spec.overlap_fraction;
  const double p_group = 0.6 * (1.0 - p_shared);

  Rng rng(seed);
  std::vector<std::pair<std::string, std::string>> records;
  records.reserve(static_cast<std::size_t>(spec.n_classes) * spec.docs_per_class);
  for (int c = 0; c < spec.n_classes; ++c) {
    const int g = topic_group_of(spec, c);
    const std::string label = "g" + std::to_string(g) + "c" + std::to_string(c);
    for (int d = 0; d < spec.docs_per_class; ++d) {
      std::string text;
      for (int t = 0; t < spec.doc_length; ++t) {
        const double u = rng.next_double();
        const std::vector<std::string>* pool;
        if (n_shared > 0 && u < p_shared) pool = &shared_vocab;
        else if (u < p_shared + p_group) pool = &group_vocab[g];
        else pool = &class_vocab[c];
        if (t) text += ' ';
        text += (*pool)[rng.below(pool->size())];
      }
      records.emplace_back(std::move(text), label);
    }
  }
  return Corpus::from_records(records);
}

void save_csv(const Corpus& corpus, const std::filesystem::path& path) {
  std::ostringstream out;
  out << "text,label\n";
  for (const Document& doc : corpus.documents())
    csv::write_row(out, {doc.raw_text, corpus.class_name(doc.class_id)});
  csv::write_file(path, out.str());
}

}  // namespace primer
