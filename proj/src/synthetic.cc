#include "premt/synthetic.h"

#include <algorithm>
#include <set>
#include <stdexcept>

#include "premt/util.h"

namespace premt {

namespace {

// Disjoint alphabets: common words, entity source strings and entity target
// strings never share characters, so no character-copy shortcut exists
// between the raw source and the target.
const std::string kCommonAlphabet = "adeinorstu";
const std::string kEntitySrcAlphabet = "0123456789";
const std::string kEntityTgtAlphabet = "qxzjwvkp";

std::string random_word(Rng& rng, const std::string& alphabet, int min_len, int max_len) {
  int len = min_len + static_cast<int>(rng.next_index(max_len - min_len + 1));
  std::string w;
  for (int i = 0; i < len; ++i) w += alphabet[rng.next_index(alphabet.size())];
  return w;
}

std::string fresh_word(Rng& rng, const std::string& alphabet, int min_len, int max_len,
                       std::set<std::string>& used) {
  for (int attempt = 0; attempt < 1000; ++attempt) {
    std::string w = random_word(rng, alphabet, min_len, max_len);
    if (used.insert(w).second) return w;
  }
  throw std::runtime_error("synthetic corpus: word space exhausted");
}

struct Lexicon {
  std::vector<std::pair<std::string, std::string>> nouns;     // src -> tgt
  std::vector<std::pair<std::string, std::string>> verbs;
  std::vector<std::pair<std::string, std::string>> adverbs;
  std::vector<std::pair<std::string, std::string>> entities;  // rare, trained twice
  std::vector<std::pair<std::string, std::string>> hapax;     // trained once
};

Lexicon build_lexicon(const SyntheticSpec& spec, Rng& rng) {
  Lexicon lex;
  std::set<std::string> used = {"the", "a", "der", "ein", "."};
  auto make_pairs = [&](int n, int min_len, int max_len) {
    std::vector<std::pair<std::string, std::string>> pairs;
    for (int i = 0; i < n; ++i) {
      std::string src = fresh_word(rng, kCommonAlphabet, min_len, max_len, used);
      std::string tgt = fresh_word(rng, kCommonAlphabet, min_len, max_len, used);
      pairs.emplace_back(src, tgt);
    }
    return pairs;
  };
  lex.nouns = make_pairs(25, 4, 6);
  lex.verbs = make_pairs(10, 4, 6);
  lex.adverbs = make_pairs(8, 4, 6);
  for (int i = 0; i < spec.num_rare_entities; ++i) {
    lex.entities.emplace_back(fresh_word(rng, kEntitySrcAlphabet, 5, 8, used),
                              fresh_word(rng, kEntityTgtAlphabet, 5, 8, used));
  }
  for (int i = 0; i < spec.num_hapax; ++i) {
    lex.hapax.emplace_back(fresh_word(rng, kEntitySrcAlphabet, 5, 8, used),
                           fresh_word(rng, kEntityTgtAlphabet, 5, 8, used));
  }
  return lex;
}

// noun_override, when set, replaces the first noun slot (a rare entity or
// hapax pair).
SentencePair make_sentence(const Lexicon& lex, Rng& rng,
                           const std::pair<std::string, std::string>* noun_override) {
  const auto& n1 =
      noun_override ? *noun_override : lex.nouns[rng.next_index(lex.nouns.size())];
  const auto& n2 = lex.nouns[rng.next_index(lex.nouns.size())];
  const auto& v = lex.verbs[rng.next_index(lex.verbs.size())];
  const auto& adv = lex.adverbs[rng.next_index(lex.adverbs.size())];

  SentencePair pair;
  switch (rng.next_index(3)) {
    case 0:
      // Long-range: the verb crosses four positions.
      pair.source = {"the", n1.first, v.first, "the", n2.first, adv.first, "."};
      pair.target = {"der", n1.second, "der", n2.second, adv.second, v.second, "."};
      break;
    case 1:
      pair.source = {"a", n1.first, v.first, "the", n2.first, "."};
      pair.target = {"ein", n1.second, "der", n2.second, v.second, "."};
      break;
    default:
      pair.source = {"the", n1.first, adv.first, v.first, "the", n2.first, "."};
      pair.target = {"der", n1.second, adv.second, "der", n2.second, v.second, "."};
      break;
  }
  return pair;
}

ParallelCorpus make_split(const Lexicon& lex, Rng& rng, int n_pairs, double entity_rate) {
  ParallelCorpus corpus;
  for (int i = 0; i < n_pairs; ++i) {
    const std::pair<std::string, std::string>* override_pair = nullptr;
    if (!lex.entities.empty() && rng.next_double() < entity_rate) {
      override_pair = &lex.entities[rng.next_index(lex.entities.size())];
    }
    corpus.pairs.push_back(make_sentence(lex, rng, override_pair));
  }
  return corpus;
}

}  // namespace

SyntheticData make_synthetic_corpus(const SyntheticSpec& spec) {
  int special = 2 * spec.num_rare_entities + spec.num_hapax;
  if (spec.train_pairs < special) {
    throw std::runtime_error("synthetic corpus: train_pairs too small for the rare tokens");
  }
  Rng rng(spec.seed);
  Lexicon lex = build_lexicon(spec, rng);

  SyntheticData data;
  // Entity sentences first (two per entity), then hapax (one each), then
  // common filler; the order is shuffled afterwards.
  Rng train_rng = rng.fork(1);
  for (const auto& entity : lex.entities) {
    data.train.pairs.push_back(make_sentence(lex, train_rng, &entity));
    data.train.pairs.push_back(make_sentence(lex, train_rng, &entity));
  }
  for (const auto& hapax : lex.hapax) {
    data.train.pairs.push_back(make_sentence(lex, train_rng, &hapax));
  }
  while (static_cast<int>(data.train.pairs.size()) < spec.train_pairs) {
    data.train.pairs.push_back(make_sentence(lex, train_rng, nullptr));
  }
  shuffle_indices(data.train.pairs, train_rng);

  Rng dev_rng = rng.fork(2);
  data.dev = make_split(lex, dev_rng, spec.dev_pairs, spec.dev_entity_rate);
  Rng test_rng = rng.fork(3);
  data.test = make_split(lex, test_rng, spec.test_pairs, spec.test_entity_rate);
  return data;
}

}  // namespace premt
