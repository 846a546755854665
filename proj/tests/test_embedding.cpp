#include <doctest.h>

#include <cmath>

#include "primer/embedding.hpp"
#include "primer/error.hpp"
#include "primer/rng.hpp"
#include "test_util.hpp"

using namespace primer;

namespace {

// Two topics with disjoint 8-word vocabularies; docs rotate through their
// topic's words with varying starts so every pair co-occurs.
Corpus two_topic_corpus() {
  std::vector<std::pair<std::string, std::string>> records;
  auto make_doc = [](const char* prefix, int start, int stride) {
    std::string text;
    for (int t = 0; t < 24; ++t) {
      if (t) text += ' ';
      text += prefix + std::to_string((start + t * stride) % 8);
    }
    return text;
  };
  for (int d = 0; d < 12; ++d) {
    records.emplace_back(make_doc("apple", d % 8, 1 + d % 3), "fruit");
    records.emplace_back(make_doc("motor", d % 8, 1 + d % 3), "cars");
  }
  return Corpus::from_records(records);
}

double cosine(const Vector& a, const Vector& b) {
  return a.dot(b) / (a.norm() * b.norm());
}

EmbeddingTable hand_table() {
  EmbeddingTable t;
  t.dim = 3;
  t.vectors = Matrix::Zero(3, 3);
  t.vectors << 1.0, 2.0, 3.0,
               4.0, 5.0, 6.0,
               0.5, 0.5, 0.5;
  t.has_vector = {true, true, false};
  return t;
}

}  // namespace

TEST_CASE("zero-epoch training returns the seeded initialization") {
  Corpus c = two_topic_corpus();
  SgnsConfig cfg;
  cfg.dim = 8;
  cfg.epochs = 0;
  cfg.min_count = 1;
  cfg.seed = 123;
  EmbeddingTable t = train_sgns(c, cfg);
  REQUIRE(t.vectors.rows() == c.vocab_size());
  REQUIRE(t.dim == 8);

  Rng replay(123);
  for (int i = 0; i < c.vocab_size(); ++i)
    for (int j = 0; j < 8; ++j)
      CHECK(t.vectors(i, j) == (replay.next_double() - 0.5) / 8);
  CHECK(t.vectors.cwiseAbs().maxCoeff() <= 0.5 / 8);
  for (int w = 0; w < c.vocab_size(); ++w) CHECK(t.has_vector[w]);
}

TEST_CASE("training is bitwise deterministic for a fixed seed") {
  Corpus c = two_topic_corpus();
  SgnsConfig cfg;
  cfg.dim = 12;
  cfg.epochs = 2;
  cfg.min_count = 1;
  cfg.seed = 7;
  EmbeddingTable a = train_sgns(c, cfg);
  EmbeddingTable b = train_sgns(c, cfg);
  CHECK(a.vectors == b.vectors);
  cfg.seed = 8;
  EmbeddingTable other = train_sgns(c, cfg);
  CHECK(a.vectors != other.vectors);
}

TEST_CASE("trained vectors are finite and move from their initialization") {
  Corpus c = two_topic_corpus();
  SgnsConfig cfg;
  cfg.dim = 12;
  cfg.min_count = 1;
  cfg.epochs = 3;
  EmbeddingTable trained = train_sgns(c, cfg);
  CHECK(trained.vectors.allFinite());
  cfg.epochs = 0;
  EmbeddingTable init = train_sgns(c, cfg);
  CHECK((trained.vectors - init.vectors).cwiseAbs().maxCoeff() > 1e-6);
}

TEST_CASE("words of one topic end up closer than words across topics") {
  Corpus c = two_topic_corpus();
  SgnsConfig cfg;
  cfg.dim = 16;
  cfg.window = 3;
  cfg.negatives = 3;
  cfg.epochs = 8;
  cfg.learning_rate = 0.05;
  cfg.min_count = 1;
  cfg.seed = 3;
  EmbeddingTable t = train_sgns(c, cfg);

  std::vector<int> fruit, cars;
  for (int w = 0; w < c.vocab_size(); ++w) {
    if (c.word(w).rfind("apple", 0) == 0) fruit.push_back(w);
    else cars.push_back(w);
  }
  REQUIRE(fruit.size() == 8);
  REQUIRE(cars.size() == 8);

  double within = 0.0, cross = 0.0;
  int n_within = 0, n_cross = 0;
  auto add_within = [&](const std::vector<int>& grp) {
    for (std::size_t i = 0; i < grp.size(); ++i)
      for (std::size_t j = i + 1; j < grp.size(); ++j) {
        within += cosine(t.vectors.row(grp[i]), t.vectors.row(grp[j]));
        ++n_within;
      }
  };
  add_within(fruit);
  add_within(cars);
  for (int a : fruit)
    for (int b : cars) {
      cross += cosine(t.vectors.row(a), t.vectors.row(b));
      ++n_cross;
    }
  CHECK(within / n_within > cross / n_cross);
}

TEST_CASE("min_count masks rare words and rejects filtering everything") {
  Corpus c = Corpus::from_records({{"common common common rare", "a"},
                                   {"common common other other", "b"}});
  SgnsConfig cfg;
  cfg.dim = 4;
  cfg.epochs = 0;
  cfg.min_count = 2;
  EmbeddingTable t = train_sgns(c, cfg);
  CHECK(t.has_vector[*c.word_id("common")]);
  CHECK(t.has_vector[*c.word_id("other")]);
  CHECK(!t.has_vector[*c.word_id("rare")]);

  cfg.min_count = 100;
  CHECK_THROWS_AS(train_sgns(c, cfg), ValidationError);
}

TEST_CASE("training rejects nonsense hyperparameters") {
  Corpus c = two_topic_corpus();
  SgnsConfig cfg;
  cfg.dim = 1;
  CHECK_THROWS_AS(train_sgns(c, cfg), ValidationError);
  cfg = SgnsConfig{};
  cfg.window = 0;
  CHECK_THROWS_AS(train_sgns(c, cfg), ValidationError);
  cfg = SgnsConfig{};
  cfg.negatives = 0;
  CHECK_THROWS_AS(train_sgns(c, cfg), ValidationError);
  cfg = SgnsConfig{};
  cfg.learning_rate = 0.0;
  CHECK_THROWS_AS(train_sgns(c, cfg), ValidationError);
  cfg = SgnsConfig{};
  cfg.epochs = -1;
  CHECK_THROWS_AS(train_sgns(c, cfg), ValidationError);
}

TEST_CASE("example gradient matches finite differences") {
  Rng rng(99);
  auto rand_vec = [&](int n) {
    Vector v(n);
    for (int i = 0; i < n; ++i) v[i] = rng.next_double() * 2 - 1;
    return v;
  };
  for (int trial = 0; trial < 5; ++trial) {
    const int dim = 6;
    Vector center = rand_vec(dim);
    Vector context = rand_vec(dim);
    Matrix negatives(3, dim);
    for (int i = 0; i < 3; ++i) negatives.row(i) = rand_vec(dim).transpose();

    SgnsExampleGrad g = sgns_example_grad(center, context, negatives);
    const double h = 1e-5;
    auto check_close = [](double analytic, double fd) {
      const double rel =
          std::abs(analytic - fd) / std::max(1e-6, std::abs(analytic) + std::abs(fd));
      CHECK(rel < 1e-4);
    };
    for (int i = 0; i < dim; ++i) {
      Vector cp = center, cm = center;
      cp[i] += h;
      cm[i] -= h;
      check_close(g.center[i], (sgns_example_loss(cp, context, negatives) -
                                sgns_example_loss(cm, context, negatives)) /
                                   (2 * h));
      Vector xp = context, xm = context;
      xp[i] += h;
      xm[i] -= h;
      check_close(g.context[i], (sgns_example_loss(center, xp, negatives) -
                                 sgns_example_loss(center, xm, negatives)) /
                                    (2 * h));
      for (int n = 0; n < 3; ++n) {
        Matrix np = negatives, nm = negatives;
        np(n, i) += h;
        nm(n, i) -= h;
        check_close(g.negatives(n, i), (sgns_example_loss(center, context, np) -
                                        sgns_example_loss(center, context, nm)) /
                                           (2 * h));
      }
    }
  }
}

TEST_CASE("a gradient step lowers the example loss") {
  Rng rng(4);
  Vector center(5), context(5);
  Matrix negatives(2, 5);
  for (int i = 0; i < 5; ++i) {
    center[i] = rng.next_double() - 0.5;
    context[i] = rng.next_double() - 0.5;
    negatives(0, i) = rng.next_double() - 0.5;
    negatives(1, i) = rng.next_double() - 0.5;
  }
  const double before = sgns_example_loss(center, context, negatives);
  SgnsExampleGrad g = sgns_example_grad(center, context, negatives);
  const double lr = 0.1;
  center -= lr * g.center;
  context -= lr * g.context;
  negatives -= lr * g.negatives;
  CHECK(sgns_example_loss(center, context, negatives) < before);
}

TEST_CASE("doc_vector averages token vectors with multiplicity") {
  EmbeddingTable t = hand_table();
  Document single;
  single.tokens = {1};
  bool oov = true;
  Vector v = doc_vector(single, t, &oov);
  CHECK(!oov);
  CHECK(v == t.vectors.row(1).transpose());

  Document multi;
  multi.tokens = {0, 0, 1};
  v = doc_vector(multi, t, &oov);
  Vector expected = (2.0 * t.vectors.row(0) + t.vectors.row(1)).transpose() / 3.0;
  CHECK(v.isApprox(expected, 1e-15));

  Document reordered;
  reordered.tokens = {0, 1, 0};
  CHECK(doc_vector(reordered, t) == v);
}

TEST_CASE("doc_vector skips out-of-vocabulary tokens") {
  EmbeddingTable t = hand_table();
  Document mixed;
  mixed.tokens = {1, 2};  // word 2 has no vector
  bool oov = true;
  Vector v = doc_vector(mixed, t, &oov);
  CHECK(!oov);
  CHECK(v == t.vectors.row(1).transpose());
}

TEST_CASE("doc_vector of a fully out-of-vocabulary document is zero") {
  EmbeddingTable t = hand_table();
  Document doc;
  doc.tokens = {2, 2};
  bool oov = false;
  Vector v = doc_vector(doc, t, &oov);
  CHECK(oov);
  CHECK(v.norm() == 0.0);
  CHECK(v.size() == 3);
}

TEST_CASE("save and load round-trip a trained table exactly") {
  testutil::TempDir tmp;
  Corpus c = two_topic_corpus();
  SgnsConfig cfg;
  cfg.dim = 6;
  cfg.epochs = 1;
  cfg.min_count = 1;
  EmbeddingTable trained = train_sgns(c, cfg);
  auto path = tmp.file("vec.txt");
  save_embeddings(trained, c, path);
  EmbeddingTable loaded = load_pretrained(path, c);
  CHECK(loaded.dim == trained.dim);
  CHECK(loaded.vectors == trained.vectors);
  CHECK(loaded.source == EmbeddingTable::Source::loaded);
  CHECK(loaded.missing_words == 0);
}

TEST_CASE("load_pretrained fills only vocabulary words") {
  testutil::TempDir tmp;
  Corpus vocab = Corpus::from_records({{"alpha beta", "x"}, {"beta alpha", "y"}});
  auto path = tmp.file("vec.txt");
  testutil::write_text(path,
                       "alpha 1 2 3 4\n"
                       "gamma 9 9 9 9\n"
                       "beta 5 6 7 8\n");
  EmbeddingTable t = load_pretrained(path, vocab);
  CHECK(t.dim == 4);
  CHECK(t.vectors.rows() == vocab.vocab_size());
  CHECK(t.vectors.row(*vocab.word_id("alpha"))[0] == 1.0);
  CHECK(t.vectors.row(*vocab.word_id("beta"))[3] == 8.0);
  CHECK(t.has_vector[*vocab.word_id("alpha")]);
  CHECK(t.has_vector[*vocab.word_id("beta")]);
  CHECK(t.missing_words == 0);
}

TEST_CASE("load_pretrained counts vocabulary words missing from the file") {
  testutil::TempDir tmp;
  Corpus vocab =
      Corpus::from_records({{"alpha beta gamma", "x"}, {"alpha beta", "y"}});
  auto path = tmp.file("vec.txt");
  testutil::write_text(path, "alpha 1 2\n");
  EmbeddingTable t = load_pretrained(path, vocab);
  CHECK(t.missing_words == 2);
  CHECK(!t.has_vector[*vocab.word_id("gamma")]);
  CHECK(t.vectors.row(*vocab.word_id("gamma")).norm() == 0.0);
}

TEST_CASE("load_pretrained takes the dimension from a count header") {
  testutil::TempDir tmp;
  Corpus vocab = Corpus::from_records({{"alpha beta", "x"}, {"beta", "y"}});
  auto path = tmp.file("vec.txt");
  testutil::write_text(path, "7 3\nalpha 1 2 3\nbeta 4 5 6\n");
  EmbeddingTable t = load_pretrained(path, vocab);
  CHECK(t.dim == 3);
  CHECK(t.vectors(*vocab.word_id("beta"), 2) == 6.0);
}

TEST_CASE("load_pretrained rejects rows that disagree with the header") {
  testutil::TempDir tmp;
  Corpus vocab = Corpus::from_records({{"alpha beta", "x"}, {"beta", "y"}});
  auto path = tmp.file("vec.txt");
  testutil::write_text(path, "2 300\nalpha 1 2 3\n");
  try {
    load_pretrained(path, vocab);
    FAIL("expected FormatError");
  } catch (const FormatError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
}

TEST_CASE("load_pretrained cites the line of a ragged row") {
  testutil::TempDir tmp;
  Corpus vocab = Corpus::from_records({{"alpha beta", "x"}, {"beta", "y"}});
  auto path = tmp.file("vec.txt");
  testutil::write_text(path, "alpha 1 2 3\nbeta 4 5\n");
  try {
    load_pretrained(path, vocab);
    FAIL("expected FormatError");
  } catch (const FormatError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
}

TEST_CASE("load_pretrained rejects non-numeric values and empty files") {
  testutil::TempDir tmp;
  Corpus vocab = Corpus::from_records({{"alpha beta", "x"}, {"beta", "y"}});
  auto bad = tmp.file("bad.txt");
  testutil::write_text(bad, "alpha 1.2x 3\n");
  CHECK_THROWS_AS(load_pretrained(bad, vocab), FormatError);
  auto empty = tmp.file("empty.txt");
  testutil::write_text(empty, "\n\n");
  CHECK_THROWS_AS(load_pretrained(empty, vocab), FormatError);
  CHECK_THROWS_AS(load_pretrained(tmp.file("missing.txt"), vocab), IoError);
}

TEST_CASE("a two-field first line that is not numeric is data, not header") {
  testutil::TempDir tmp;
  Corpus vocab = Corpus::from_records({{"solo other", "x"}, {"other", "y"}});
  auto path = tmp.file("vec.txt");
  testutil::write_text(path, "solo 3.5\nother 1.5\n");
  EmbeddingTable t = load_pretrained(path, vocab);
  CHECK(t.dim == 1);
  CHECK(t.vectors(*vocab.word_id("solo"), 0) == 3.5);
}
