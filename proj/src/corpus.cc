#include "premt/corpus.h"

#include <algorithm>
#include <sstream>

#include "premt/util.h"

namespace premt {

std::vector<Sentence> ParallelCorpus::sources() const {
  std::vector<Sentence> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) out.push_back(p.source);
  return out;
}

std::vector<Sentence> ParallelCorpus::targets() const {
  std::vector<Sentence> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) out.push_back(p.target);
  return out;
}

namespace {

void check_token(const std::string& tok, const LoadOptions& opts,
                 const std::string& path, std::size_t line_no) {
  if (opts.forbid_reserved &&
      (tok == kUnkToken || tok == kBosToken || tok == kEosToken || tok == kPadToken)) {
    throw std::runtime_error(path + ":" + std::to_string(line_no) +
                             ": reserved token \"" + tok + "\" in input text");
  }
  if (!opts.forbid_marker.empty() && tok.find(opts.forbid_marker) != std::string::npos) {
    throw std::runtime_error(path + ":" + std::to_string(line_no) + ": token \"" + tok +
                             "\" contains the continuation marker \"" +
                             opts.forbid_marker + "\"");
  }
  for (const auto& prefix : opts.forbid_prefixes) {
    if (tok.rfind(prefix, 0) == 0) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": token \"" + tok +
                               "\" already starts with marking prefix \"" + prefix + "\"");
    }
  }
}

// Lines with trailing blanks stripped; throws on invalid UTF-8.
std::vector<std::string> load_lines_checked(const std::string& path) {
  std::string content = read_file(path);
  std::vector<std::string> lines = split_lines(content);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (!is_valid_utf8(lines[i])) {
      throw std::runtime_error(path + ":" + std::to_string(i + 1) +
                               ": undecodable bytes (not UTF-8)");
    }
  }
  while (!lines.empty() && split_tokens(lines.back()).empty()) lines.pop_back();
  return lines;
}

Sentence parse_sentence(const std::string& line, const LoadOptions& opts,
                        const std::string& path, std::size_t line_no) {
  Sentence tokens = split_tokens(line);
  if (tokens.empty()) {
    throw std::runtime_error(path + ":" + std::to_string(line_no) + ": empty sentence");
  }
  for (const auto& tok : tokens) check_token(tok, opts, path, line_no);
  return tokens;
}

}  // namespace

std::vector<Sentence> load_sentences(const std::string& path, const LoadOptions& opts) {
  std::vector<std::string> lines = load_lines_checked(path);
  std::vector<Sentence> out;
  out.reserve(lines.size());
  for (std::size_t i = 0; i < lines.size(); ++i) {
    out.push_back(parse_sentence(lines[i], opts, path, i + 1));
  }
  return out;
}

ParallelCorpus load_corpus(const std::string& source_path, const std::string& target_path,
                           const LoadOptions& opts) {
  std::vector<std::string> src_lines = load_lines_checked(source_path);
  std::vector<std::string> tgt_lines = load_lines_checked(target_path);
  if (src_lines.size() != tgt_lines.size()) {
    throw std::runtime_error("line-count mismatch: " + source_path + " has " +
                             std::to_string(src_lines.size()) + " sentences, " + target_path +
                             " has " + std::to_string(tgt_lines.size()));
  }
  ParallelCorpus corpus;
  corpus.pairs.reserve(src_lines.size());
  for (std::size_t i = 0; i < src_lines.size(); ++i) {
    SentencePair pair;
    pair.source = parse_sentence(src_lines[i], opts, source_path, i + 1);
    pair.target = parse_sentence(tgt_lines[i], opts, target_path, i + 1);
    corpus.pairs.push_back(std::move(pair));
  }
  return corpus;
}

void save_sentences(const std::string& path, const std::vector<Sentence>& sents) {
  std::string out;
  for (const auto& s : sents) {
    out += join_tokens(s);
    out += '\n';
  }
  write_file(path, out);
}

Vocabulary::Vocabulary() {
  id_to_token_ = {kUnkToken, kBosToken, kEosToken, kPadToken};
  for (std::size_t i = 0; i < id_to_token_.size(); ++i) {
    token_to_id_[id_to_token_[i]] = static_cast<int>(i);
  }
}

Vocabulary Vocabulary::build(const std::vector<Sentence>& sentences, int min_count) {
  if (sentences.empty()) throw std::runtime_error("build_vocabulary: empty corpus");
  std::unordered_map<std::string, std::int64_t> counts;
  for (const auto& sent : sentences) {
    for (const auto& tok : sent) ++counts[tok];
  }
  return from_counts(counts, min_count);
}

Vocabulary Vocabulary::from_counts(const std::unordered_map<std::string, std::int64_t>& counts,
                                   int min_count) {
  if (min_count < 1) throw std::runtime_error("build_vocabulary: min_count must be >= 1");
  Vocabulary vocab;
  vocab.counts_ = counts;
  // Deterministic id order: by count descending, then token.
  std::vector<std::pair<std::string, std::int64_t>> items(counts.begin(), counts.end());
  std::sort(items.begin(), items.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  for (const auto& [tok, cnt] : items) {
    if (cnt >= min_count && !vocab.token_to_id_.count(tok)) {
      int id = static_cast<int>(vocab.id_to_token_.size());
      vocab.id_to_token_.push_back(tok);
      vocab.token_to_id_[tok] = id;
    }
  }
  return vocab;
}

int Vocabulary::id(const std::string& token) const {
  auto it = token_to_id_.find(token);
  return it == token_to_id_.end() ? kUnkId : it->second;
}

bool Vocabulary::contains(const std::string& token) const {
  return token_to_id_.count(token) > 0;
}

const std::string& Vocabulary::token(int id) const {
  if (id < 0 || id >= static_cast<int>(id_to_token_.size())) {
    throw std::runtime_error("vocabulary id out of range: " + std::to_string(id));
  }
  return id_to_token_[id];
}

std::int64_t Vocabulary::count(const std::string& token) const {
  auto it = counts_.find(token);
  return it == counts_.end() ? 0 : it->second;
}

std::vector<int> Vocabulary::encode(const Sentence& sentence) const {
  std::vector<int> ids;
  ids.reserve(sentence.size());
  for (const auto& tok : sentence) ids.push_back(id(tok));
  return ids;
}

Sentence Vocabulary::decode(const std::vector<int>& ids) const {
  Sentence out;
  out.reserve(ids.size());
  for (int i : ids) out.push_back(token(i));
  return out;
}

std::string Vocabulary::serialize() const {
  std::ostringstream ss;
  for (std::size_t i = 0; i < id_to_token_.size(); ++i) {
    const std::string& tok = id_to_token_[i];
    ss << tok << '\t' << i << '\t' << count(tok) << '\n';
  }
  std::vector<std::string> unmapped;
  for (const auto& [tok, cnt] : counts_) {
    if (!token_to_id_.count(tok)) unmapped.push_back(tok);
  }
  std::sort(unmapped.begin(), unmapped.end());
  for (const auto& tok : unmapped) {
    ss << tok << "\t-1\t" << count(tok) << '\n';
  }
  return ss.str();
}

Vocabulary Vocabulary::deserialize(const std::string& content) {
  Vocabulary vocab;
  vocab.id_to_token_.clear();
  vocab.token_to_id_.clear();
  for (const std::string& line : split_lines(content)) {
    if (line.empty()) continue;
    std::size_t t1 = line.find('\t');
    std::size_t t2 = line.find('\t', t1 + 1);
    if (t1 == std::string::npos || t2 == std::string::npos) {
      throw std::runtime_error("malformed vocabulary line: " + line);
    }
    std::string tok = line.substr(0, t1);
    int id = std::stoi(line.substr(t1 + 1, t2 - t1 - 1));
    std::int64_t cnt = std::stoll(line.substr(t2 + 1));
    if (cnt > 0) vocab.counts_[tok] = cnt;
    if (id >= 0) {
      if (id != static_cast<int>(vocab.id_to_token_.size())) {
        throw std::runtime_error("vocabulary ids not dense at: " + line);
      }
      vocab.id_to_token_.push_back(tok);
      vocab.token_to_id_[tok] = id;
    }
  }
  for (int r = 0; r < kNumReservedIds; ++r) {
    if (r >= static_cast<int>(vocab.id_to_token_.size())) {
      throw std::runtime_error("vocabulary file missing reserved tokens");
    }
  }
  return vocab;
}

void Vocabulary::save(const std::string& path) const { write_file(path, serialize()); }

Vocabulary Vocabulary::load(const std::string& path) {
  return deserialize(read_file(path));
}

}  // namespace premt
