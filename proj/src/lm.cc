#include "premt/lm.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "premt/util.h"

namespace premt {

namespace {

std::string join_key(const std::vector<std::string>& tokens, std::size_t begin,
                     std::size_t end) {
  std::string key;
  for (std::size_t i = begin; i < end; ++i) {
    if (i > begin) key += ' ';
    key += tokens[i];
  }
  return key;
}

}  // namespace

NGramModel NGramModel::train(const std::vector<Sentence>& corpus, int order,
                             double discount) {
  if (order < 1) throw std::runtime_error("train_lm: order must be >= 1");
  if (corpus.empty()) throw std::runtime_error("train_lm: empty corpus");
  if (discount <= 0.0 || discount >= 1.0) {
    throw std::runtime_error("train_lm: discount must be in (0,1)");
  }

  NGramModel model;
  model.order_ = order;
  model.discount_ = discount;
  model.vocab_ = Vocabulary::build(corpus, 1);
  model.counts_.assign(order, {});

  for (const auto& sent : corpus) {
    // BOS padding, EOS termination; events are the tokens plus EOS.
    std::vector<std::string> stream(order - 1, kBosToken);
    stream.insert(stream.end(), sent.begin(), sent.end());
    stream.push_back(kEosToken);
    for (std::size_t pos = order - 1; pos < stream.size(); ++pos) {
      for (int k = 1; k <= order; ++k) {
        ++model.counts_[k - 1][join_key(stream, pos - (k - 1), pos + 1)];
      }
    }
  }
  model.index_contexts();
  return model;
}

void NGramModel::index_contexts() {
  context_stats_.assign(order_, {});
  for (int k = 1; k <= order_; ++k) {
    for (const auto& [key, count] : counts_[k - 1]) {
      std::string context;
      if (k > 1) {
        std::size_t last_space = key.rfind(' ');
        context = key.substr(0, last_space);
      }
      ContextStat& stat = context_stats_[k - 1][context];
      stat.total += count;
      stat.distinct += 1;
    }
  }
  // Uniform floor ranges over the observed unigram event types plus UNK
  // (EOS is always observed).
  base_types_ = static_cast<std::int64_t>(counts_[0].size());
  if (!counts_[0].count(kUnkToken)) ++base_types_;
}

std::vector<std::string> NGramModel::event_types() const {
  std::vector<std::string> types;
  types.reserve(counts_[0].size() + 1);
  for (const auto& [tok, count] : counts_[0]) types.push_back(tok);
  if (!counts_[0].count(kUnkToken)) types.push_back(kUnkToken);
  std::sort(types.begin(), types.end());
  return types;
}

double NGramModel::prob(const std::string& word,
                        const std::vector<std::string>& padded_context, int k) const {
  if (k == 0) return 1.0 / static_cast<double>(base_types_);
  // Context = last k-1 entries of the padded window.
  std::string ctx_key =
      join_key(padded_context, padded_context.size() - (k - 1), padded_context.size());
  auto stat_it = context_stats_[k - 1].find(ctx_key);
  double lower = prob(word, padded_context, k - 1);
  if (stat_it == context_stats_[k - 1].end() || stat_it->second.total == 0) {
    return lower;
  }
  const ContextStat& stat = stat_it->second;
  std::string full_key = ctx_key.empty() ? word : ctx_key + ' ' + word;
  auto cnt_it = counts_[k - 1].find(full_key);
  double cnt = cnt_it == counts_[k - 1].end() ? 0.0 : static_cast<double>(cnt_it->second);
  double total = static_cast<double>(stat.total);
  double head = std::max(cnt - discount_, 0.0) / total;
  double backoff_mass = discount_ * static_cast<double>(stat.distinct) / total;
  return head + backoff_mass * lower;
}

double NGramModel::log_prob(const std::string& word,
                            const std::vector<std::string>& context) const {
  if (order_ < 1) throw std::runtime_error("NGramModel: model not trained");
  auto map_token = [this](const std::string& t) -> std::string {
    if (t == kBosToken || t == kEosToken) return t;
    return vocab_.contains(t) ? t : std::string(kUnkToken);
  };
  std::vector<std::string> padded(order_ - 1, kBosToken);
  std::size_t take = std::min(context.size(), static_cast<std::size_t>(order_ - 1));
  for (std::size_t i = 0; i < take; ++i) {
    padded[order_ - 1 - take + i] = map_token(context[context.size() - take + i]);
  }
  return std::log(prob(map_token(word), padded, order_));
}

double NGramModel::score_sequence(const Sentence& sentence) const {
  std::vector<std::string> context;
  double total = 0.0;
  for (const auto& tok : sentence) {
    total += log_prob(tok, context);
    context.push_back(tok);
  }
  total += log_prob(kEosToken, context);
  return total;
}

double NGramModel::perplexity(const std::vector<Sentence>& corpus) const {
  if (corpus.empty()) throw std::runtime_error("perplexity: empty corpus");
  double log_sum = 0.0;
  std::int64_t tokens = 0;
  for (const auto& sent : corpus) {
    log_sum += score_sequence(sent);
    tokens += static_cast<std::int64_t>(sent.size()) + 1;  // + EOS
  }
  return std::exp(-log_sum / static_cast<double>(tokens));
}

std::string NGramModel::serialize() const {
  std::ostringstream ss;
  ss << "#premt-lm v1 order=" << order_ << " discount=" << fmt_double(discount_, 4) << '\n';
  for (int k = 1; k <= order_; ++k) {
    std::vector<std::pair<std::string, std::int64_t>> items(counts_[k - 1].begin(),
                                                            counts_[k - 1].end());
    std::sort(items.begin(), items.end());
    for (const auto& [key, count] : items) ss << key << '\t' << count << '\n';
  }
  return ss.str();
}

NGramModel NGramModel::deserialize(const std::string& content) {
  std::vector<std::string> lines = split_lines(content);
  if (lines.empty() || lines[0].rfind("#premt-lm v1 ", 0) != 0) {
    throw std::runtime_error("lm file: missing \"#premt-lm v1\" header");
  }
  NGramModel model;
  {
    std::istringstream header(lines[0].substr(std::string("#premt-lm v1 ").size()));
    std::string field;
    while (header >> field) {
      if (field.rfind("order=", 0) == 0) model.order_ = std::stoi(field.substr(6));
      else if (field.rfind("discount=", 0) == 0) model.discount_ = std::stod(field.substr(9));
    }
  }
  if (model.order_ < 1) throw std::runtime_error("lm file: bad order in header");
  model.counts_.assign(model.order_, {});
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    std::size_t tab = lines[i].rfind('\t');
    if (tab == std::string::npos) {
      throw std::runtime_error("lm file: malformed line " + std::to_string(i + 1));
    }
    std::string key = lines[i].substr(0, tab);
    std::int64_t count = std::stoll(lines[i].substr(tab + 1));
    int k = 1 + static_cast<int>(std::count(key.begin(), key.end(), ' '));
    if (k < 1 || k > model.order_) {
      throw std::runtime_error("lm file: n-gram order out of range at line " +
                               std::to_string(i + 1));
    }
    model.counts_[k - 1][key] = count;
  }
  // Rebuild the vocabulary from unigram events (EOS is not a text token).
  std::unordered_map<std::string, std::int64_t> vocab_counts;
  for (const auto& [tok, count] : model.counts_[0]) {
    if (tok != kEosToken && tok != kBosToken) vocab_counts[tok] = count;
  }
  model.vocab_ = Vocabulary::from_counts(vocab_counts, 1);
  model.index_contexts();
  return model;
}

void NGramModel::save(const std::string& path) const { write_file(path, serialize()); }

NGramModel NGramModel::load(const std::string& path) {
  return deserialize(read_file(path));
}

}  // namespace premt
