#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace primer {

/// (byte-offset, part-of-speech) synset identity. Ordering is offset-first,
/// which is the tie-break order used by lcs().
struct SynsetId {
  std::uint32_t offset = 0;
  char pos = 'n';
  auto operator<=>(const SynsetId&) const = default;
};

struct SynsetIdHash {
  std::size_t operator()(const SynsetId& id) const {
    return std::hash<std::uint64_t>()(
        (static_cast<std::uint64_t>(id.offset) << 8) |
        static_cast<unsigned char>(id.pos));
  }
};

struct Synset {
  SynsetId id;
  std::vector<std::string> lemmas;
  std::vector<SynsetId> hypernyms;  // @ and @i pointers
};

/// Hypernym DAG over WordNet synsets, single-rooted through a virtual root
/// placed above every parentless synset. Immutable after parse; all queries
/// are read-only.
class Taxonomy {
 public:
  static constexpr char kRootPos = '^';
  static SynsetId virtual_root() { return SynsetId{0, kRootPos}; }

  /// Synset count excluding the virtual root.
  std::size_t size() const { return synsets_.size() - 1; }

  bool contains(SynsetId id) const { return index_of_.count(id) > 0; }
  const Synset& synset(SynsetId id) const;

  /// Every parsed synset id in file order, virtual root excluded.
  std::vector<SynsetId> all_ids() const;

  /// First noun sense if any, else first sense in n,v,a,r part-of-speech
  /// order; nullopt for words absent from the index.
  std::optional<SynsetId> first_synset(const std::string& word) const;

  /// All senses of a word, noun senses first, each part of speech in its
  /// index order.
  std::vector<SynsetId> senses(const std::string& word) const;

  /// Shortest hypernym path length to the virtual root; depth(root) == 1.
  int depth(SynsetId id) const;

  /// Deepest common subsumer (ancestor-or-self of both); depth ties broken by
  /// smaller id. The virtual root guarantees existence.
  SynsetId lcs(SynsetId a, SynsetId b) const;

  /// 2*depth(lcs) / (depth(a)+depth(b)), in (0, 1].
  double wu_palmer(SynsetId a, SynsetId b) const;

  friend Taxonomy parse_wordnet(const std::filesystem::path& dir);

 private:
  int index_of(SynsetId id) const;
  void finalize();  // attach root, check acyclicity, precompute depths

  std::vector<Synset> synsets_;  // last element is the virtual root
  std::unordered_map<SynsetId, int, SynsetIdHash> index_of_;
  std::vector<int> depth_;
  // (lemma, pos) -> synset ids in sense order
  std::unordered_map<std::string, std::vector<SynsetId>> sense_index_;
};

/// Parses a Princeton WordNet 3.x database directory (data.pos/index.pos).
/// data.noun and index.noun are required; verb/adj/adv files are loaded when
/// present.
Taxonomy parse_wordnet(const std::filesystem::path& dir);

}  // namespace primer
