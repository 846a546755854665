#include "primer/taxonomy.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <sstream>

#include "primer/error.hpp"

namespace primer {

namespace {

struct PosFile {
  char pos;
  const char* data_name;
  const char* index_name;
};

constexpr PosFile kPosFiles[] = {
    {'n', "data.noun", "index.noun"},
    {'v', "data.verb", "index.verb"},
    {'a', "data.adj", "index.adj"},
    {'r', "data.adv", "index.adv"},
};

bool all_digits(const std::string& s) {
  if (s.empty()) return false;
  return std::all_of(s.begin(), s.end(),
                     [](char c) { return c >= '0' && c <= '9'; });
}

std::uint32_t parse_offset(const std::string& s, const std::string& where) {
  if (!all_digits(s))
    throw FormatError(where + ": malformed offset '" + s + "'");
  return static_cast<std::uint32_t>(std::stoul(s));
}

std::vector<std::string> split_ws(const std::string& line) {
  std::istringstream ss(line);
  std::vector<std::string> out;
  std::string tok;
  while (ss >> tok) out.push_back(tok);
  return out;
}

char normalize_ss_type(char t, const std::string& where) {
  switch (t) {
    case 'n': case 'v': case 'a': case 'r': return t;
    case 's': return 'a';  // adjective satellite lives in the adj file
    default:
      throw FormatError(where + ": unknown synset type '" + std::string(1, t) +
                        "'");
  }
}

void parse_data_file(const std::filesystem::path& path,
                     std::vector<Synset>& synsets) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open file: " + path.string());
  const std::string fname = path.filename().string();
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line.compare(0, 2, "  ") == 0) continue;  // header
    const auto bar = line.find('|');
    const std::string head = bar == std::string::npos ? line : line.substr(0, bar);
    const auto t = split_ws(head);
    if (t.size() < 5)
      throw FormatError(fname + ": truncated synset line: " + line.substr(0, 40));

    const std::string where = fname + ": synset " + t[0];
    Synset s;
    s.id.offset = parse_offset(t[0], where);
    if (t[2].size() != 1) throw FormatError(where + ": bad synset type");
    s.id.pos = normalize_ss_type(t[2][0], where);

    std::size_t i = 3;
    const long w_cnt = std::strtol(t[i].c_str(), nullptr, 16);
    if (w_cnt < 1) throw FormatError(where + ": bad word count '" + t[i] + "'");
    ++i;
    for (long w = 0; w < w_cnt; ++w) {
      if (i + 1 >= t.size())
        throw FormatError(where + ": word list runs past end of line");
      s.lemmas.push_back(t[i]);
      i += 2;  // word, lex_id
    }

    if (i >= t.size()) throw FormatError(where + ": missing pointer count");
    if (!all_digits(t[i]))
      throw FormatError(where + ": bad pointer count '" + t[i] + "'");
    const long p_cnt = std::strtol(t[i].c_str(), nullptr, 10);
    ++i;
    for (long p = 0; p < p_cnt; ++p) {
      if (i + 3 >= t.size())
        throw FormatError(where + ": pointer list runs past end of line");
      const std::string& symbol = t[i];
      const std::string& target_offset = t[i + 1];
      const std::string& target_pos = t[i + 2];
      if (symbol == "@" || symbol == "@i") {
        SynsetId h;
        h.offset = parse_offset(target_offset, where + ": pointer " + symbol);
        if (target_pos.size() != 1)
          throw FormatError(where + ": bad pointer pos '" + target_pos + "'");
        h.pos = normalize_ss_type(target_pos[0], where);
        s.hypernyms.push_back(h);
      }
      i += 4;  // symbol, offset, pos, source/target
    }
    // verb frames and anything else before the gloss are ignored
    synsets.push_back(std::move(s));
  }
}

void parse_index_file(
    const std::filesystem::path& path, char pos,
    std::unordered_map<std::string, std::vector<SynsetId>>& index,
    std::vector<std::pair<std::string, char>>& lemma_order) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open file: " + path.string());
  const std::string fname = path.filename().string();
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line.compare(0, 2, "  ") == 0) continue;
    const auto t = split_ws(line);
    if (t.size() < 6)
      throw FormatError(fname + ": truncated index line: " + line.substr(0, 40));
    const std::string& lemma = t[0];
    const std::string where = fname + ": lemma " + lemma;
    if (!all_digits(t[2]) || !all_digits(t[3]))
      throw FormatError(where + ": bad counts");
    const long synset_cnt = std::strtol(t[2].c_str(), nullptr, 10);
    const long p_cnt = std::strtol(t[3].c_str(), nullptr, 10);
    const std::size_t first_offset = 4 + static_cast<std::size_t>(p_cnt) + 2;
    if (first_offset + synset_cnt > t.size() + 0u)
      throw FormatError(where + ": offset list runs past end of line");
    auto& senses = index[lemma + "\x1f" + pos];
    if (senses.empty()) lemma_order.emplace_back(lemma, pos);
    for (long k = 0; k < synset_cnt; ++k)
      senses.push_back(SynsetId{
          parse_offset(t[first_offset + k], where), pos});
  }
}

}  // namespace

const Synset& Taxonomy::synset(SynsetId id) const {
  return synsets_[static_cast<std::size_t>(index_of(id))];
}

std::vector<SynsetId> Taxonomy::all_ids() const {
  std::vector<SynsetId> ids;
  ids.reserve(size());
  for (std::size_t i = 0; i + 1 < synsets_.size(); ++i)
    ids.push_back(synsets_[i].id);
  return ids;
}

int Taxonomy::index_of(SynsetId id) const {
  auto it = index_of_.find(id);
  if (it == index_of_.end())
    throw ValidationError("synset not in taxonomy: offset " +
                          std::to_string(id.offset) + " pos " +
                          std::string(1, id.pos));
  return it->second;
}

std::optional<SynsetId> Taxonomy::first_synset(const std::string& word) const {
  for (char pos : {'n', 'v', 'a', 'r'}) {
    auto it = sense_index_.find(word + "\x1f" + pos);
    if (it != sense_index_.end() && !it->second.empty()) return it->second[0];
  }
  return std::nullopt;
}

std::vector<SynsetId> Taxonomy::senses(const std::string& word) const {
  std::vector<SynsetId> out;
  for (char pos : {'n', 'v', 'a', 'r'}) {
    auto it = sense_index_.find(word + "\x1f" + pos);
    if (it != sense_index_.end())
      out.insert(out.end(), it->second.begin(), it->second.end());
  }
  return out;
}

int Taxonomy::depth(SynsetId id) const {
  return depth_[static_cast<std::size_t>(index_of(id))];
}

SynsetId Taxonomy::lcs(SynsetId a, SynsetId b) const {
  // ancestors-or-self of a, by index
  std::unordered_map<int, bool> a_anc;
  std::deque<int> queue{index_of(a)};
  while (!queue.empty()) {
    const int i = queue.front();
    queue.pop_front();
    if (!a_anc.emplace(i, true).second) continue;
    for (SynsetId h : synsets_[i].hypernyms) queue.push_back(index_of(h));
  }

  bool found = false;
  SynsetId best{};
  int best_depth = 0;
  std::unordered_map<int, bool> visited;
  queue.push_back(index_of(b));
  while (!queue.empty()) {
    const int i = queue.front();
    queue.pop_front();
    if (!visited.emplace(i, true).second) continue;
    if (a_anc.count(i)) {
      const SynsetId id = synsets_[i].id;
      const int d = depth_[i];
      if (!found || d > best_depth || (d == best_depth && id < best)) {
        found = true;
        best = id;
        best_depth = d;
      }
    }
    for (SynsetId h : synsets_[i].hypernyms) queue.push_back(index_of(h));
  }
  return best;  // virtual root at worst
}

double Taxonomy::wu_palmer(SynsetId a, SynsetId b) const {
  const int da = depth(a);
  const int db = depth(b);
  const int dl = depth(lcs(a, b));
  return 2.0 * dl / (da + db);
}

void Taxonomy::finalize() {
  Synset root;
  root.id = virtual_root();
  root.lemmas = {"<root>"};
  synsets_.push_back(root);

  index_of_.clear();
  for (std::size_t i = 0; i < synsets_.size(); ++i) {
    if (!index_of_.emplace(synsets_[i].id, static_cast<int>(i)).second)
      throw FormatError("duplicate synset offset " +
                        std::to_string(synsets_[i].id.offset));
  }

  const int root_index = index_of(virtual_root());
  for (auto& s : synsets_) {
    if (s.id == virtual_root()) continue;
    for (SynsetId h : s.hypernyms) {
      if (h == s.id)
        throw ValidationError("self-loop hypernym at offset " +
                              std::to_string(s.id.offset));
      if (!index_of_.count(h))
        throw FormatError("synset " + std::to_string(s.id.offset) + " (" +
                          std::string(1, s.id.pos) +
                          "): hypernym pointer to nonexistent offset " +
                          std::to_string(h.offset));
    }
    if (s.hypernyms.empty()) s.hypernyms.push_back(virtual_root());
  }

  // Kahn order over child->parent edges; doubles as cycle check and lets
  // depths be filled in one pass (all parents resolved before any child).
  const std::size_t n = synsets_.size();
  std::vector<int> indeg(n, 0);
  std::vector<std::vector<int>> children(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (SynsetId h : synsets_[i].hypernyms) {
      const int p = index_of(h);
      children[static_cast<std::size_t>(p)].push_back(static_cast<int>(i));
      ++indeg[i];
    }
  }
  depth_.assign(n, 0);
  std::deque<int> queue;
  queue.push_back(root_index);
  depth_[static_cast<std::size_t>(root_index)] = 1;
  std::size_t processed = 0;
  while (!queue.empty()) {
    const int p = queue.front();
    queue.pop_front();
    ++processed;
    for (int c : children[static_cast<std::size_t>(p)]) {
      auto& dc = depth_[static_cast<std::size_t>(c)];
      const int via = depth_[static_cast<std::size_t>(p)] + 1;
      if (dc == 0 || via < dc) dc = via;
      if (--indeg[static_cast<std::size_t>(c)] == 0) queue.push_back(c);
    }
  }
  if (processed != n)
    throw ValidationError("hypernym graph contains a cycle (" +
                          std::to_string(n - processed) +
                          " unreachable synsets)");
}

Taxonomy parse_wordnet(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir))
    throw ValidationError("not a directory: " + dir.string());
  if (!std::filesystem::exists(dir / "data.noun") ||
      !std::filesystem::exists(dir / "index.noun"))
    throw ValidationError(dir.string() +
                          ": data.noun and index.noun are required");

  Taxonomy tax;
  std::vector<std::pair<std::string, char>> lemma_order;  // unused, kept cheap
  for (const PosFile& pf : kPosFiles) {
    const auto data_path = dir / pf.data_name;
    const auto index_path = dir / pf.index_name;
    if (!std::filesystem::exists(data_path)) continue;
    parse_data_file(data_path, tax.synsets_);
    if (std::filesystem::exists(index_path))
      parse_index_file(index_path, pf.pos, tax.sense_index_, lemma_order);
  }
  tax.finalize();
  return tax;
}

}  // namespace primer
