#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <map>
#include <unistd.h>

#include "premt/corpus.h"
#include "premt/util.h"

using namespace premt;

namespace {

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    path = std::filesystem::temp_directory_path() /
           ("premt_test_" + std::to_string(::getpid()) + "_" +
            std::to_string(reinterpret_cast<std::uintptr_t>(this)));
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  std::string file(const std::string& name, const std::string& content) {
    std::string p = (path / name).string();
    write_file(p, content);
    return p;
  }
};

}  // namespace

TEST_CASE("load_corpus pairs lines") {
  TempDir dir;
  std::string src = dir.file("a.txt", "a b\nc\n");
  std::string tgt = dir.file("b.txt", "x\ny z\n");
  ParallelCorpus corpus = load_corpus(src, tgt);
  REQUIRE(corpus.size() == 2);
  CHECK(corpus.pairs[0].source == Sentence{"a", "b"});
  CHECK(corpus.pairs[0].target == Sentence{"x"});
  CHECK(corpus.pairs[1].source == Sentence{"c"});
  CHECK(corpus.pairs[1].target == Sentence{"y", "z"});
}

TEST_CASE("load_corpus line-count mismatch names both counts") {
  TempDir dir;
  std::string src = dir.file("a.txt", "a\nb\nc\n");
  std::string tgt = dir.file("b.txt", "x\ny\n");
  try {
    load_corpus(src, tgt);
    FAIL("expected error");
  } catch (const std::exception& e) {
    std::string msg = e.what();
    CHECK(msg.find("3") != std::string::npos);
    CHECK(msg.find("2") != std::string::npos);
    CHECK(msg.find("mismatch") != std::string::npos);
  }
}

TEST_CASE("whitespace runs collapse") {
  TempDir dir;
  std::string p = dir.file("a.txt", "  a   b \n");
  std::vector<Sentence> sents = load_sentences(p);
  REQUIRE(sents.size() == 1);
  CHECK(sents[0] == Sentence{"a", "b"});
}

TEST_CASE("trailing blank lines ignored, interior blank is an error") {
  TempDir dir;
  std::string ok = dir.file("ok.txt", "a\nb\n\n\n");
  CHECK(load_sentences(ok).size() == 2);
  std::string bad = dir.file("bad.txt", "a\n\nb\n");
  CHECK_THROWS_WITH_AS(load_sentences(bad), doctest::Contains("empty sentence"),
                       std::runtime_error);
}

TEST_CASE("reserved tokens and markers rejected at ingest") {
  TempDir dir;
  CHECK_THROWS_AS(load_sentences(dir.file("r.txt", "a <unk> b\n")), std::runtime_error);
  CHECK_THROWS_AS(load_sentences(dir.file("m.txt", "foo@@ bar\n")), std::runtime_error);
  LoadOptions subword;
  subword.forbid_marker.clear();
  CHECK(load_sentences(dir.file("m2.txt", "foo@@ bar\n"), subword).size() == 1);
  LoadOptions prefixes;
  prefixes.forbid_prefixes = {"D_", "E_"};
  CHECK_THROWS_AS(load_sentences(dir.file("p.txt", "D_foo bar\n"), prefixes),
                  std::runtime_error);
}

TEST_CASE("invalid UTF-8 reported with line number") {
  TempDir dir;
  std::string p = dir.file("u.txt", std::string("ok line\na\xff" "b\n"));
  CHECK_THROWS_WITH_AS(load_sentences(p), doctest::Contains(":2"), std::runtime_error);
}

TEST_CASE("vocabulary counts and min_count threshold") {
  Vocabulary vocab = Vocabulary::build({{"a", "a", "b"}}, 1);
  CHECK(vocab.count("a") == 2);
  CHECK(vocab.count("b") == 1);
  CHECK(vocab.contains("a"));
  CHECK(vocab.contains("b"));
  CHECK(vocab.id(kUnkToken) == kUnkId);

  Vocabulary thresholded = Vocabulary::build({{"a", "a", "b"}}, 2);
  CHECK(thresholded.id("b") == kUnkId);  // maps to UNK
  CHECK(thresholded.count("b") == 1);    // count still recorded
}

TEST_CASE("vocabulary counts match an independent tally") {
  std::vector<Sentence> corpus = {{"the", "cat", "sat"},
                                  {"the", "dog", "sat", "sat"},
                                  {"a", "cat"}};
  // Oracle: single-pass tally, written without reference to Vocabulary.
  std::map<std::string, long> tally;
  std::size_t total = 0;
  for (const auto& sent : corpus) {
    for (const auto& tok : sent) {
      ++tally[tok];
      ++total;
    }
  }
  Vocabulary vocab = Vocabulary::build(corpus, 1);
  for (const auto& [tok, count] : tally) CHECK(vocab.count(tok) == count);
  std::int64_t sum = 0;
  for (const auto& [tok, count] : vocab.counts()) sum += count;
  CHECK(sum == static_cast<std::int64_t>(total));
}

TEST_CASE("vocabulary serialization round trip") {
  Vocabulary vocab = Vocabulary::build({{"a", "a", "b", "c"}, {"a", "b"}}, 2);
  Vocabulary reloaded = Vocabulary::deserialize(vocab.serialize());
  CHECK(reloaded.size() == vocab.size());
  for (std::size_t id = 0; id < vocab.size(); ++id) {
    CHECK(reloaded.token(static_cast<int>(id)) == vocab.token(static_cast<int>(id)));
  }
  CHECK(reloaded.counts() == vocab.counts());  // includes sub-threshold "c"
  CHECK(reloaded.count("c") == 1);
  CHECK(reloaded.id("c") == kUnkId);
  CHECK(reloaded.serialize() == vocab.serialize());
}

TEST_CASE("encode/decode round trip through ids") {
  Vocabulary vocab = Vocabulary::build({{"x", "y", "z"}}, 1);
  Sentence s = {"x", "z", "y"};
  CHECK(vocab.decode(vocab.encode(s)) == s);
  CHECK(vocab.encode({"missing"}) == std::vector<int>{kUnkId});
}
