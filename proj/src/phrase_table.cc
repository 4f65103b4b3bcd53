#include "premt/phrase_table.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "premt/util.h"

namespace premt {

namespace {
constexpr double kLexFloor = 1e-12;
}

void PhraseTable::add(PhrasePair pair) {
  entries_[join_tokens(pair.source)].push_back(std::move(pair));
}

const std::vector<PhrasePair>* PhraseTable::lookup(const std::string& source_key) const {
  auto it = entries_.find(source_key);
  return it == entries_.end() ? nullptr : &it->second;
}

const std::vector<PhrasePair>* PhraseTable::lookup(const Sentence& source_phrase) const {
  return lookup(join_tokens(source_phrase));
}

std::size_t PhraseTable::num_pairs() const {
  std::size_t n = 0;
  for (const auto& [key, pairs] : entries_) n += pairs.size();
  return n;
}

std::string PhraseTable::serialize() const {
  std::ostringstream ss;
  for (const auto& [key, pairs] : entries_) {
    for (const auto& pair : pairs) {
      ss << join_tokens(pair.source) << " ||| " << join_tokens(pair.target) << " |||";
      for (double f : pair.features) ss << ' ' << fmt_double_exact(f);
      ss << " ||| " << pair.count << '\n';
    }
  }
  return ss.str();
}

PhraseTable PhraseTable::deserialize(const std::string& content) {
  PhraseTable table;
  for (const std::string& line : split_lines(content)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      std::size_t sep = line.find(" ||| ", start);
      if (sep == std::string::npos) {
        fields.push_back(line.substr(start));
        break;
      }
      fields.push_back(line.substr(start, sep - start));
      start = sep + 5;
    }
    if (fields.size() != 4) {
      throw std::runtime_error("phrase table: malformed line: " + line);
    }
    PhrasePair pair;
    pair.source = split_tokens(fields[0]);
    pair.target = split_tokens(fields[1]);
    for (const std::string& f : split_tokens(fields[2])) {
      pair.features.push_back(parse_double_exact(f));
    }
    pair.count = std::stoll(fields[3]);
    if (pair.source.empty() || pair.target.empty()) {
      throw std::runtime_error("phrase table: empty side: " + line);
    }
    table.add(std::move(pair));
  }
  return table;
}

void PhraseTable::save(const std::string& path) const { write_file(path, serialize()); }

PhraseTable PhraseTable::load(const std::string& path) {
  return deserialize(read_file(path));
}

namespace {

// Lexical weight of one extracted occurrence, following the usual
// definition: aligned target words average their source translation
// probabilities, unaligned ones use NULL.
double lexical_weight(const Sentence& src, const Sentence& tgt,
                      const std::vector<std::vector<int>>& tgt_to_src,
                      const LexicalTable& lex) {
  double w = 1.0;
  for (std::size_t j = 0; j < tgt.size(); ++j) {
    const std::vector<int>& linked = tgt_to_src[j];
    double p;
    if (linked.empty()) {
      p = lex.prob(kNullToken, tgt[j]);
    } else {
      p = 0.0;
      for (int i : linked) p += lex.prob(src[i], tgt[j]);
      p /= static_cast<double>(linked.size());
    }
    w *= std::max(p, kLexFloor);
  }
  return w;
}

struct Occurrence {
  Sentence source;
  Sentence target;
  double lex_tgt_given_src;
  double lex_src_given_tgt;
};

}  // namespace

PhraseTable extract_phrases(const ParallelCorpus& corpus,
                            const std::vector<Alignment>& alignments, int max_phrase_len,
                            const LexicalTable& lex, const LexicalTable& reverse_lex) {
  if (max_phrase_len < 1) {
    throw std::runtime_error("extract_phrases: max_phrase_len must be >= 1");
  }
  if (alignments.size() != corpus.size()) {
    throw std::runtime_error("extract_phrases: alignment count does not cover corpus");
  }

  // key "src ||| tgt" -> (count, best lexical weights).
  std::map<std::string, std::pair<std::int64_t, Occurrence>> collected;
  std::map<std::string, std::int64_t> src_totals, tgt_totals;

  for (std::size_t n = 0; n < corpus.size(); ++n) {
    const Sentence& src = corpus.pairs[n].source;
    const Sentence& tgt = corpus.pairs[n].target;
    const Alignment& links = alignments[n];
    int I = static_cast<int>(src.size());
    int J = static_cast<int>(tgt.size());

    for (int i1 = 0; i1 < I; ++i1) {
      for (int i2 = i1; i2 < std::min(I, i1 + max_phrase_len); ++i2) {
        for (int j1 = 0; j1 < J; ++j1) {
          for (int j2 = j1; j2 < std::min(J, j1 + max_phrase_len); ++j2) {
            bool has_link = false, consistent = true;
            for (const auto& [i, j] : links) {
              bool i_in = i >= i1 && i <= i2;
              bool j_in = j >= j1 && j <= j2;
              if (i_in && j_in) has_link = true;
              else if (i_in != j_in) { consistent = false; break; }
            }
            if (!has_link || !consistent) continue;

            Occurrence occ;
            occ.source.assign(src.begin() + i1, src.begin() + i2 + 1);
            occ.target.assign(tgt.begin() + j1, tgt.begin() + j2 + 1);
            // Internal alignment, target-indexed and source-indexed.
            std::vector<std::vector<int>> t2s(occ.target.size()), s2t(occ.source.size());
            for (const auto& [i, j] : links) {
              if (i >= i1 && i <= i2 && j >= j1 && j <= j2) {
                t2s[j - j1].push_back(i - i1);
                s2t[i - i1].push_back(j - j1);
              }
            }
            occ.lex_tgt_given_src = lexical_weight(occ.source, occ.target, t2s, lex);
            occ.lex_src_given_tgt = lexical_weight(occ.target, occ.source, s2t, reverse_lex);

            std::string key = join_tokens(occ.source) + " ||| " + join_tokens(occ.target);
            auto it = collected.find(key);
            if (it == collected.end()) {
              collected.emplace(key, std::make_pair(1, occ));
            } else {
              it->second.first += 1;
              // Keep the best-scoring internal alignment.
              it->second.second.lex_tgt_given_src =
                  std::max(it->second.second.lex_tgt_given_src, occ.lex_tgt_given_src);
              it->second.second.lex_src_given_tgt =
                  std::max(it->second.second.lex_src_given_tgt, occ.lex_src_given_tgt);
            }
            ++src_totals[join_tokens(occ.source)];
            ++tgt_totals[join_tokens(occ.target)];
          }
        }
      }
    }
  }

  PhraseTable table;
  for (const auto& [key, entry] : collected) {
    const auto& [count, occ] = entry;
    PhrasePair pair;
    pair.source = occ.source;
    pair.target = occ.target;
    pair.count = count;
    double p_tgt_given_src = static_cast<double>(count) /
                             static_cast<double>(src_totals[join_tokens(occ.source)]);
    double p_src_given_tgt = static_cast<double>(count) /
                             static_cast<double>(tgt_totals[join_tokens(occ.target)]);
    pair.features = {std::log(p_tgt_given_src), std::log(p_src_given_tgt),
                     std::log(occ.lex_tgt_given_src), std::log(occ.lex_src_given_tgt), 1.0};
    table.add(std::move(pair));
  }
  return table;
}

PhraseTable filter_singletons(const PhraseTable& table) {
  PhraseTable filtered;
  filtered.set_feature_names(table.feature_names());
  for (const auto& [key, pairs] : table.entries()) {
    for (const auto& pair : pairs) {
      if (pair.count != 1) filtered.add(pair);
    }
  }
  return filtered;
}

}  // namespace premt
