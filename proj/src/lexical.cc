#include "premt/lexical.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "premt/util.h"

namespace premt {

double LexicalTable::prob(const std::string& source, const std::string& target) const {
  auto row_it = probs_.find(source);
  if (row_it == probs_.end()) return 0.0;
  auto it = row_it->second.find(target);
  return it == row_it->second.end() ? 0.0 : it->second;
}

const std::unordered_map<std::string, double>* LexicalTable::row(
    const std::string& source) const {
  auto it = probs_.find(source);
  return it == probs_.end() ? nullptr : &it->second;
}

void LexicalTable::set(const std::string& source, const std::string& target, double p) {
  probs_[source][target] = p;
}

std::string LexicalTable::serialize() const {
  std::vector<std::string> lines;
  for (const auto& [src, row] : probs_) {
    for (const auto& [tgt, p] : row) {
      lines.push_back(src + ' ' + tgt + ' ' + fmt_double_exact(p));
    }
  }
  std::sort(lines.begin(), lines.end());
  std::string out;
  for (const auto& l : lines) {
    out += l;
    out += '\n';
  }
  return out;
}

LexicalTable LexicalTable::deserialize(const std::string& content) {
  LexicalTable table;
  for (const std::string& line : split_lines(content)) {
    if (line.empty()) continue;
    std::vector<std::string> parts = split_tokens(line);
    if (parts.size() != 3) throw std::runtime_error("lexical table: malformed line: " + line);
    table.set(parts[0], parts[1], parse_double_exact(parts[2]));
  }
  return table;
}

void LexicalTable::save(const std::string& path) const { write_file(path, serialize()); }

LexicalTable LexicalTable::load(const std::string& path) {
  return deserialize(read_file(path));
}

LexicalTable train_ibm1(const ParallelCorpus& corpus, int iterations) {
  if (corpus.empty()) throw std::runtime_error("train_ibm1: empty corpus");
  if (iterations < 1) throw std::runtime_error("train_ibm1: iterations must be >= 1");

  // Uniform initialization over co-occurring pairs (plus NULL).
  LexicalTable table;
  {
    std::unordered_map<std::string, std::unordered_map<std::string, int>> cooc;
    for (const auto& pair : corpus.pairs) {
      for (const auto& e : pair.target) {
        cooc[kNullToken][e] = 1;
        for (const auto& f : pair.source) cooc[f][e] = 1;
      }
    }
    for (auto& [f, row] : cooc) {
      double uniform = 1.0 / static_cast<double>(row.size());
      for (auto& [e, unused] : row) table.set(f, e, uniform);
    }
  }

  for (int iter = 0; iter < iterations; ++iter) {
    std::unordered_map<std::string, std::unordered_map<std::string, double>> counts;
    std::unordered_map<std::string, double> totals;
    for (const auto& pair : corpus.pairs) {
      for (const auto& e : pair.target) {
        double denom = table.prob(kNullToken, e);
        for (const auto& f : pair.source) denom += table.prob(f, e);
        if (denom <= 0.0) continue;
        double c = table.prob(kNullToken, e) / denom;
        counts[kNullToken][e] += c;
        totals[kNullToken] += c;
        for (const auto& f : pair.source) {
          c = table.prob(f, e) / denom;
          counts[f][e] += c;
          totals[f] += c;
        }
      }
    }
    LexicalTable next;
    for (const auto& [f, row] : counts) {
      double total = totals[f];
      if (total <= 0.0) continue;
      for (const auto& [e, c] : row) next.set(f, e, c / total);
    }
    table = std::move(next);
  }
  return table;
}

double ibm1_log_likelihood(const ParallelCorpus& corpus, const LexicalTable& lex) {
  double ll = 0.0;
  for (const auto& pair : corpus.pairs) {
    double denom_positions = static_cast<double>(pair.source.size()) + 1.0;
    for (const auto& e : pair.target) {
      double p = lex.prob(kNullToken, e);
      for (const auto& f : pair.source) p += lex.prob(f, e);
      ll += std::log(std::max(p / denom_positions, 1e-300));
    }
  }
  return ll;
}

Alignment align_viterbi(const SentencePair& pair, const LexicalTable& lex) {
  Alignment links;
  for (std::size_t j = 0; j < pair.target.size(); ++j) {
    const std::string& e = pair.target[j];
    double best = lex.prob(kNullToken, e);
    int best_i = -1;  // NULL
    for (std::size_t i = 0; i < pair.source.size(); ++i) {
      double p = lex.prob(pair.source[i], e);
      if (p > best) {  // strict: ties keep the leftmost (or NULL)
        best = p;
        best_i = static_cast<int>(i);
      }
    }
    if (best_i >= 0) links.emplace_back(best_i, static_cast<int>(j));
  }
  return links;
}

Alignment align_intersect(const SentencePair& pair, const LexicalTable& lex,
                          const LexicalTable& reverse_lex) {
  Alignment forward = align_viterbi(pair, lex);
  SentencePair swapped{pair.target, pair.source};
  Alignment backward_swapped = align_viterbi(swapped, reverse_lex);
  // backward_swapped links are (target position, source position).
  std::vector<AlignmentLink> backward;
  backward.reserve(backward_swapped.size());
  for (const auto& [j, i] : backward_swapped) backward.emplace_back(i, j);
  std::sort(forward.begin(), forward.end());
  std::sort(backward.begin(), backward.end());
  Alignment out;
  std::set_intersection(forward.begin(), forward.end(), backward.begin(), backward.end(),
                        std::back_inserter(out));
  return out;
}

std::string serialize_alignments(const std::vector<Alignment>& alignments) {
  std::string out;
  for (const auto& links : alignments) {
    for (std::size_t k = 0; k < links.size(); ++k) {
      if (k) out += ' ';
      out += std::to_string(links[k].first) + '-' + std::to_string(links[k].second);
    }
    out += '\n';
  }
  return out;
}

std::vector<Alignment> deserialize_alignments(const std::string& content) {
  std::vector<Alignment> out;
  for (const std::string& line : split_lines(content)) {
    Alignment links;
    for (const std::string& tok : split_tokens(line)) {
      std::size_t dash = tok.find('-');
      if (dash == std::string::npos) {
        throw std::runtime_error("alignment file: malformed link: " + tok);
      }
      links.emplace_back(std::stoi(tok.substr(0, dash)), std::stoi(tok.substr(dash + 1)));
    }
    out.push_back(std::move(links));
  }
  return out;
}

}  // namespace premt
