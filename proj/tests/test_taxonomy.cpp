#include <doctest.h>

#include <algorithm>

#include "primer/error.hpp"
#include "primer/taxonomy.hpp"
#include "test_util.hpp"

using namespace primer;

namespace {

// Offsets inside fixtures/wordnet_mini: a three-level hierarchy under a
// shared root, two leaves per branch.
constexpr SynsetId kRoot{140, 'n'};
constexpr SynsetId kX{210, 'n'};
constexpr SynsetId kY{271, 'n'};
constexpr SynsetId kX1{332, 'n'};
constexpr SynsetId kX2{402, 'n'};
constexpr SynsetId kY1{466, 'n'};
constexpr SynsetId kY2{529, 'n'};

Taxonomy mini() { return parse_wordnet(testutil::fixture("wordnet_mini")); }

void write_minimal_index(const std::filesystem::path& dir) {
  testutil::write_text(dir / "index.noun", "aaa n 1 0 1 0 00000100  \n");
}

}  // namespace

TEST_CASE("parsing the mini lexicon finds all synsets and lemmas") {
  Taxonomy t = mini();
  CHECK(t.size() == 7);
  CHECK(t.contains(kX1));
  CHECK(!t.contains(SynsetId{999, 'n'}));
  const Synset& s = t.synset(kX1);
  REQUIRE(s.lemmas.size() == 2);
  CHECK(s.lemmas[0] == "xone");
  CHECK(s.lemmas[1] == "dual");
  REQUIRE(s.hypernyms.size() == 1);
  CHECK(s.hypernyms[0] == kX);
  auto ids = t.all_ids();
  CHECK(ids.size() == 7);
  CHECK(std::count(ids.begin(), ids.end(), Taxonomy::virtual_root()) == 0);
}

TEST_CASE("depth counts nodes on the shortest path to the virtual root") {
  Taxonomy t = mini();
  CHECK(t.depth(Taxonomy::virtual_root()) == 1);
  CHECK(t.depth(kRoot) == 2);
  CHECK(t.depth(kX) == 3);
  CHECK(t.depth(kY) == 3);
  CHECK(t.depth(kX1) == 4);
  CHECK(t.depth(kY2) == 4);
}

TEST_CASE("lcs returns the deepest common subsumer") {
  Taxonomy t = mini();
  CHECK(t.lcs(kX1, kX2) == kX);
  CHECK(t.lcs(kX1, kY1) == kRoot);
  CHECK(t.lcs(kX1, kX1) == kX1);
  CHECK(t.lcs(kX1, kX) == kX);  // ancestor of the other
  CHECK(t.lcs(kX, kY) == kRoot);
}

TEST_CASE("wu_palmer matches hand-computed values on the mini lexicon") {
  Taxonomy t = mini();
  CHECK(t.wu_palmer(kX1, kX1) == 1.0);
  CHECK(t.wu_palmer(kX1, kX2) == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(t.wu_palmer(kX1, kY1) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(t.wu_palmer(kX, kY) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("wu_palmer is symmetric and bounded on every synset pair") {
  Taxonomy t = mini();
  auto ids = t.all_ids();
  for (SynsetId a : ids)
    for (SynsetId b : ids) {
      const double w = t.wu_palmer(a, b);
      CHECK(w > 0.0);
      CHECK(w <= 1.0);
      CHECK(w == t.wu_palmer(b, a));
      if (a == b) CHECK(w == 1.0);
    }
}

TEST_CASE("equal-depth subsumer ties resolve to the smaller offset") {
  Taxonomy t = parse_wordnet(testutil::fixture("wordnet_diamond"));
  const SynsetId pa{166, 'n'};  // dpa and dpb sit at the same depth
  const SynsetId l1{292, 'n'};
  const SynsetId l2{378, 'n'};
  CHECK(t.lcs(l1, l2) == pa);
  CHECK(t.wu_palmer(l1, l2) == doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("multi-parent depth takes the minimum over parents") {
  Taxonomy t = parse_wordnet(testutil::fixture("wordnet_multi"));
  const SynsetId c{262, 'n'};  // parents at depths 3 and 2
  CHECK(t.depth(c) == 3);
  REQUIRE(t.synset(c).hypernyms.size() == 2);
}

TEST_CASE("first_synset prefers nouns and falls back to verbs") {
  Taxonomy t = parse_wordnet(testutil::fixture("wordnet_multi"));
  CHECK(t.first_synset("ambi") == SynsetId{193, 'n'});
  CHECK(t.first_synset("sprint") == SynsetId{140, 'v'});
  CHECK(!t.first_synset("nosuchword").has_value());
  // same offset, different part of speech: distinct synsets
  CHECK(t.contains(SynsetId{140, 'n'}));
  CHECK(t.contains(SynsetId{140, 'v'}));
  CHECK(t.synset(SynsetId{140, 'v'}).lemmas[0] == "sprint");
}

TEST_CASE("senses lists every synset of a word in index order") {
  Taxonomy t = mini();
  auto s = t.senses("dual");
  REQUIRE(s.size() == 2);
  CHECK(s[0] == kRoot);
  CHECK(s[1] == kX1);
  CHECK(t.first_synset("dual") == kRoot);
  CHECK(t.senses("nosuchword").empty());
  CHECK(t.senses("xtwo") == std::vector<SynsetId>{kX2});
}

TEST_CASE("querying an unknown synset id is an error") {
  Taxonomy t = mini();
  CHECK_THROWS_AS(t.depth(SynsetId{999, 'n'}), ValidationError);
  CHECK_THROWS_AS(t.synset(SynsetId{999, 'n'}), ValidationError);
}

TEST_CASE("instance hypernym pointers count as hypernyms") {
  testutil::TempDir tmp;
  testutil::write_text(tmp.file("data.noun"),
                       "00000100 03 n 01 genus 0 000 | a kind  \n"
                       "00000200 03 n 01 example 0 001 @i 00000100 n 0000 | an instance  \n");
  write_minimal_index(tmp.path());
  Taxonomy t = parse_wordnet(tmp.path());
  CHECK(t.depth(SynsetId{200, 'n'}) == 3);
  CHECK(t.lcs(SynsetId{200, 'n'}, SynsetId{100, 'n'}) == SynsetId{100, 'n'});
}

TEST_CASE("a parentless synset hangs off the virtual root") {
  testutil::TempDir tmp;
  testutil::write_text(tmp.file("data.noun"),
                       "00000100 03 n 01 loner 0 000 | no parents  \n");
  write_minimal_index(tmp.path());
  Taxonomy t = parse_wordnet(tmp.path());
  CHECK(t.depth(SynsetId{100, 'n'}) == 2);
  CHECK(t.synset(SynsetId{100, 'n'}).hypernyms ==
        std::vector<SynsetId>{Taxonomy::virtual_root()});
}

TEST_CASE("a hypernym cycle is rejected") {
  testutil::TempDir tmp;
  testutil::write_text(tmp.file("data.noun"),
                       "00000100 03 n 01 aaa 0 001 @ 00000200 n 0000 | one  \n"
                       "00000200 03 n 01 bbb 0 001 @ 00000100 n 0000 | two  \n");
  write_minimal_index(tmp.path());
  CHECK_THROWS_AS(parse_wordnet(tmp.path()), ValidationError);
}

TEST_CASE("a self-loop hypernym is rejected") {
  testutil::TempDir tmp;
  testutil::write_text(tmp.file("data.noun"),
                       "00000100 03 n 01 aaa 0 001 @ 00000100 n 0000 | selfish  \n");
  write_minimal_index(tmp.path());
  CHECK_THROWS_AS(parse_wordnet(tmp.path()), ValidationError);
}

TEST_CASE("a pointer to a nonexistent offset is rejected") {
  testutil::TempDir tmp;
  testutil::write_text(tmp.file("data.noun"),
                       "00000100 03 n 01 aaa 0 001 @ 99999999 n 0000 | dangling  \n");
  write_minimal_index(tmp.path());
  CHECK_THROWS_AS(parse_wordnet(tmp.path()), FormatError);
}

TEST_CASE("duplicate offsets within one part of speech are rejected") {
  testutil::TempDir tmp;
  testutil::write_text(tmp.file("data.noun"),
                       "00000100 03 n 01 aaa 0 000 | first  \n"
                       "00000100 03 n 01 bbb 0 000 | second  \n");
  write_minimal_index(tmp.path());
  CHECK_THROWS_AS(parse_wordnet(tmp.path()), FormatError);
}

TEST_CASE("malformed data lines are rejected") {
  testutil::TempDir tmp;
  write_minimal_index(tmp.path());
  testutil::write_text(tmp.file("data.noun"), "00x00100 03 n 01 aaa 0 000 | x  \n");
  CHECK_THROWS_AS(parse_wordnet(tmp.path()), FormatError);
  testutil::write_text(tmp.file("data.noun"), "00000100 03 q 01 aaa 0 000 | x  \n");
  CHECK_THROWS_AS(parse_wordnet(tmp.path()), FormatError);
  testutil::write_text(tmp.file("data.noun"), "00000100 03 n 02 aaa 0 000 | x  \n");
  CHECK_THROWS_AS(parse_wordnet(tmp.path()), FormatError);
  testutil::write_text(tmp.file("data.noun"), "00000100 03\n");
  CHECK_THROWS_AS(parse_wordnet(tmp.path()), FormatError);
}

TEST_CASE("a directory without the noun database is rejected") {
  testutil::TempDir tmp;
  CHECK_THROWS_AS(parse_wordnet(tmp.path()), ValidationError);
  testutil::write_text(tmp.file("data.noun"),
                       "00000100 03 n 01 aaa 0 000 | alone  \n");
  CHECK_THROWS_AS(parse_wordnet(tmp.path()), ValidationError);  // no index
  CHECK_THROWS_AS(parse_wordnet(tmp.path() / "nope"), ValidationError);
}

TEST_CASE("adjective satellites normalize to the adjective part of speech") {
  testutil::TempDir tmp;
  testutil::write_text(tmp.file("data.noun"),
                       "00000100 03 n 01 noun 0 000 | a noun  \n");
  write_minimal_index(tmp.path());
  testutil::write_text(tmp.file("data.adj"),
                       "00000300 00 s 01 shiny 0 000 | satellite adjective  \n");
  testutil::write_text(tmp.file("index.adj"), "shiny a 1 0 1 0 00000300  \n");
  Taxonomy t = parse_wordnet(tmp.path());
  CHECK(t.contains(SynsetId{300, 'a'}));
  CHECK(t.first_synset("shiny") == SynsetId{300, 'a'});
}
