#include "premt/bpe.h"

#include <algorithm>
#include <map>
#include <sstream>
#include <unordered_map>

#include "premt/util.h"

namespace premt {

std::string MergeTable::serialize() const {
  std::ostringstream ss;
  ss << "#premt-bpe v1\n";
  for (const auto& [left, right] : merges) ss << left << ' ' << right << '\n';
  return ss.str();
}

MergeTable MergeTable::deserialize(const std::string& content) {
  std::vector<std::string> lines = split_lines(content);
  if (lines.empty() || lines[0] != "#premt-bpe v1") {
    throw std::runtime_error("merges file: missing \"#premt-bpe v1\" header");
  }
  MergeTable table;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    std::vector<std::string> parts = split_tokens(lines[i]);
    if (parts.size() != 2) {
      throw std::runtime_error("merges file: malformed line " + std::to_string(i + 1));
    }
    table.merges.emplace_back(parts[0], parts[1]);
  }
  return table;
}

void MergeTable::save(const std::string& path) const { write_file(path, serialize()); }

MergeTable MergeTable::load(const std::string& path) {
  return deserialize(read_file(path));
}

namespace {

using Symbols = std::vector<std::string>;

// Replaces all non-overlapping occurrences of (left,right), leftmost first.
void merge_in_place(Symbols& syms, const std::string& left, const std::string& right) {
  Symbols out;
  out.reserve(syms.size());
  std::size_t i = 0;
  while (i < syms.size()) {
    if (i + 1 < syms.size() && syms[i] == left && syms[i + 1] == right) {
      out.push_back(left + right);
      i += 2;
    } else {
      out.push_back(syms[i]);
      ++i;
    }
  }
  syms = std::move(out);
}

}  // namespace

MergeTable learn_bpe(const std::vector<Sentence>& sentences, int num_merges) {
  if (num_merges < 0) throw std::runtime_error("learn_bpe: num_merges must be >= 0");
  if (sentences.empty()) throw std::runtime_error("learn_bpe: empty corpus");

  // Word frequency dictionary; each distinct word is segmented once.
  std::unordered_map<std::string, std::int64_t> word_freq;
  for (const auto& sent : sentences) {
    for (const auto& tok : sent) ++word_freq[tok];
  }
  std::vector<std::pair<Symbols, std::int64_t>> words;
  words.reserve(word_freq.size());
  {
    std::vector<std::pair<std::string, std::int64_t>> items(word_freq.begin(), word_freq.end());
    std::sort(items.begin(), items.end());
    for (const auto& [w, c] : items) words.emplace_back(utf8_codepoints(w), c);
  }

  MergeTable table;
  for (int step = 0; step < num_merges; ++step) {
    // Count adjacent symbol pairs over the current segmentation. An ordered
    // map gives the lexicographic tie-break for free.
    std::map<std::pair<std::string, std::string>, std::int64_t> pair_counts;
    for (const auto& [syms, freq] : words) {
      for (std::size_t i = 0; i + 1 < syms.size(); ++i) {
        pair_counts[{syms[i], syms[i + 1]}] += freq;
      }
    }
    std::int64_t best_count = 0;
    const std::pair<std::string, std::string>* best = nullptr;
    for (const auto& [pair, count] : pair_counts) {
      if (count > best_count) {
        best_count = count;
        best = &pair;
      }
    }
    if (best_count < 2) break;
    table.merges.push_back(*best);
    for (auto& [syms, freq] : words) merge_in_place(syms, best->first, best->second);
  }
  return table;
}

MergeTable learn_bpe(const ParallelCorpus& corpus, int num_merges, BpeSide side) {
  std::vector<Sentence> sents;
  if (side == BpeSide::kJoint || side == BpeSide::kSource) {
    for (const auto& p : corpus.pairs) sents.push_back(p.source);
  }
  if (side == BpeSide::kJoint || side == BpeSide::kTarget) {
    for (const auto& p : corpus.pairs) sents.push_back(p.target);
  }
  return learn_bpe(sents, num_merges);
}

std::vector<std::string> segment_word(const std::string& word, const MergeTable& merges) {
  Symbols syms = utf8_codepoints(word);
  for (const auto& [left, right] : merges.merges) {
    if (syms.size() < 2) break;
    merge_in_place(syms, left, right);
  }
  return syms;
}

Sentence apply_bpe(const Sentence& sentence, const MergeTable& merges) {
  Sentence out;
  for (const auto& word : sentence) {
    Symbols units = segment_word(word, merges);
    for (std::size_t i = 0; i < units.size(); ++i) {
      if (i + 1 < units.size()) {
        out.push_back(units[i] + merges.marker);
      } else {
        out.push_back(units[i]);
      }
    }
  }
  return out;
}

std::vector<Sentence> apply_bpe(const std::vector<Sentence>& sentences,
                                const MergeTable& merges) {
  // Cache per distinct word; corpora repeat words heavily.
  std::unordered_map<std::string, Sentence> cache;
  std::vector<Sentence> out;
  out.reserve(sentences.size());
  for (const auto& sent : sentences) {
    Sentence enc;
    for (const auto& word : sent) {
      auto it = cache.find(word);
      if (it == cache.end()) {
        Sentence one = apply_bpe(Sentence{word}, merges);
        it = cache.emplace(word, std::move(one)).first;
      }
      enc.insert(enc.end(), it->second.begin(), it->second.end());
    }
    out.push_back(std::move(enc));
  }
  return out;
}

Sentence undo_bpe(const Sentence& sentence, const std::string& marker) {
  Sentence out;
  std::string pending;
  for (std::size_t i = 0; i < sentence.size(); ++i) {
    const std::string& tok = sentence[i];
    bool marked = tok.size() >= marker.size() &&
                  tok.compare(tok.size() - marker.size(), marker.size(), marker) == 0;
    if (marked) {
      if (i + 1 == sentence.size()) {
        throw std::runtime_error("undo_bpe: dangling continuation marker on final token \"" +
                                 tok + "\"");
      }
      pending += tok.substr(0, tok.size() - marker.size());
    } else {
      out.push_back(pending + tok);
      pending.clear();
    }
  }
  return out;
}

}  // namespace premt
