#include "premt/decoder.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>

#include "premt/util.h"

namespace premt {

LogLinearWeights LogLinearWeights::defaults() {
  // Positive weight on the probability features (their values are logs),
  // penalties negative.
  LogLinearWeights w;
  w.lambdas = {1.0, 1.0, 0.5, 0.5, -1.0, 0.0, 1.0, -1.0, -1.0};
  return w;
}

std::string LogLinearWeights::serialize() const {
  std::ostringstream ss;
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    ss << kDecoderFeatureNames[i] << '\t' << fmt_double_exact(lambdas[i]) << '\n';
  }
  return ss.str();
}

LogLinearWeights LogLinearWeights::deserialize(const std::string& content) {
  LogLinearWeights w;
  w.lambdas.assign(kDecoderFeatureNames.size(), 0.0);
  std::size_t seen = 0;
  for (const std::string& line : split_lines(content)) {
    if (line.empty()) continue;
    std::size_t tab = line.find('\t');
    if (tab == std::string::npos) throw std::runtime_error("weights file: malformed line: " + line);
    std::string name = line.substr(0, tab);
    auto it = std::find(kDecoderFeatureNames.begin(), kDecoderFeatureNames.end(), name);
    if (it == kDecoderFeatureNames.end()) {
      throw std::runtime_error("weights file: unknown feature: " + name);
    }
    w.lambdas[it - kDecoderFeatureNames.begin()] = parse_double_exact(line.substr(tab + 1));
    ++seen;
  }
  if (seen != kDecoderFeatureNames.size()) {
    throw std::runtime_error("weights file: expected " +
                             std::to_string(kDecoderFeatureNames.size()) + " features, got " +
                             std::to_string(seen));
  }
  return w;
}

void LogLinearWeights::save(const std::string& path) const { write_file(path, serialize()); }

LogLinearWeights LogLinearWeights::load(const std::string& path) {
  return deserialize(read_file(path));
}

std::vector<double> derivation_features(const Derivation& derivation, const NGramModel& lm) {
  std::vector<double> h(kDecoderFeatureNames.size(), 0.0);
  Sentence target;
  int prev_end = -1;
  for (const auto& app : derivation) {
    if (app.oov) {
      h[8] += 1.0;  // oov_penalty
    } else {
      for (std::size_t k = 0; k < app.table_features.size() && k < 5; ++k) {
        h[k] += app.table_features[k];
      }
    }
    h[5] += static_cast<double>(app.target.size());              // word_penalty
    h[7] += std::abs(app.src_begin - prev_end - 1);              // distortion
    prev_end = app.src_end - 1;
    target.insert(target.end(), app.target.begin(), app.target.end());
  }
  h[6] = lm.score_sequence(target);
  return h;
}

double score_derivation(const Derivation& derivation, const DecoderConfig& config) {
  std::vector<double> h = derivation_features(derivation, *config.lm);
  double score = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i) score += config.weights[i] * h[i];
  return score;
}

namespace {

struct Hypothesis {
  std::uint64_t coverage = 0;
  int covered = 0;
  int last_end = -1;  // inclusive source index of the last phrase's final word
  double score = 0.0; // incremental estimate, used for pruning only
  std::vector<std::string> lm_context;
  int parent = -1;
  PhraseApplication app;  // application that produced this hypothesis
};

Derivation collect_derivation(const std::vector<Hypothesis>& arena, int index) {
  Derivation derivation;
  while (index > 0) {
    derivation.push_back(arena[index].app);
    index = arena[index].parent;
  }
  std::reverse(derivation.begin(), derivation.end());
  return derivation;
}

DecodeResult decode_impl(const Sentence& sentence, const DecoderConfig& config,
                         int distortion_limit) {
  const PhraseTable& table = *config.table;
  const NGramModel& lm = *config.lm;
  const LogLinearWeights& w = config.weights;
  const int len = static_cast<int>(sentence.size());
  const int lm_ctx_len = lm.order() - 1;

  int max_span = 1;
  for (const auto& [key, pairs] : table.entries()) {
    max_span = std::max(max_span,
                        1 + static_cast<int>(std::count(key.begin(), key.end(), ' ')));
  }

  std::vector<Hypothesis> arena;
  arena.emplace_back();  // root: index 0, parent -1
  std::vector<std::vector<int>> stacks(len + 1);
  stacks[0].push_back(0);

  auto trim_context = [&](std::vector<std::string>& ctx) {
    if (static_cast<int>(ctx.size()) > lm_ctx_len) {
      ctx.erase(ctx.begin(), ctx.end() - lm_ctx_len);
    }
  };

  std::vector<int> completed;
  for (int covered = 0; covered < len; ++covered) {
    // Prune the stack before expanding.
    std::vector<int>& stack = stacks[covered];
    if (config.beam_size >= 1 && static_cast<int>(stack.size()) > config.beam_size) {
      std::stable_sort(stack.begin(), stack.end(), [&](int a, int b) {
        return arena[a].score > arena[b].score;
      });
      stack.resize(config.beam_size);
    }
    for (std::size_t si = 0; si < stack.size(); ++si) {
      const int hyp_index = stack[si];
      for (int s = 0; s < len; ++s) {
        if (arena[hyp_index].coverage & (1ULL << s)) continue;
        if (distortion_limit >= 0 &&
            std::abs(s - arena[hyp_index].last_end - 1) > distortion_limit) {
          continue;
        }
        for (int e = s + 1; e <= std::min(len, s + max_span); ++e) {
          if (arena[hyp_index].coverage & (1ULL << (e - 1))) break;  // span must be free
          Sentence span(sentence.begin() + s, sentence.begin() + e);
          const std::vector<PhrasePair>* options = table.lookup(span);
          std::vector<PhraseApplication> apps;
          if (options) {
            for (const auto& pair : *options) {
              PhraseApplication app;
              app.src_begin = s;
              app.src_end = e;
              app.target = pair.target;
              app.table_features = pair.features;
              apps.push_back(std::move(app));
            }
          } else if (e - s == 1) {
            // Rare-word pass-through: copy the token verbatim.
            PhraseApplication app;
            app.src_begin = s;
            app.src_end = e;
            app.target = {sentence[s]};
            app.oov = true;
            apps.push_back(std::move(app));
          }
          for (auto& app : apps) {
            const Hypothesis& h = arena[hyp_index];
            Hypothesis next;
            next.coverage = h.coverage;
            for (int k = s; k < e; ++k) next.coverage |= (1ULL << k);
            next.covered = h.covered + (e - s);
            next.last_end = e - 1;
            next.parent = hyp_index;
            next.lm_context = h.lm_context;
            double delta = 0.0;
            if (app.oov) {
              delta += w[8];
            } else {
              for (std::size_t k = 0; k < 5; ++k) delta += w[k] * app.table_features[k];
            }
            delta += w[5] * static_cast<double>(app.target.size());
            delta += w[7] * std::abs(s - h.last_end - 1);
            for (const auto& word : app.target) {
              delta += w[6] * lm.log_prob(word, next.lm_context);
              next.lm_context.push_back(word);
              trim_context(next.lm_context);
            }
            next.score = h.score + delta;
            next.app = std::move(app);
            arena.push_back(std::move(next));
            int idx = static_cast<int>(arena.size()) - 1;
            if (arena[idx].covered == len) completed.push_back(idx);
            else stacks[arena[idx].covered].push_back(idx);
          }
        }
      }
    }
  }

  DecodeResult result;
  if (completed.empty()) return result;  // caller falls back

  // Canonical scores: recompute from the derivation so the reported score is
  // exactly the log-linear numerator of the feature totals.
  struct Final {
    double score;
    std::vector<double> features;
    Sentence target;
    Derivation derivation;
  };
  std::vector<Final> scored;
  scored.reserve(completed.size());
  for (int idx : completed) {
    Final f;
    f.derivation = collect_derivation(arena, idx);
    f.features = derivation_features(f.derivation, lm);
    f.score = 0.0;
    for (std::size_t i = 0; i < f.features.size(); ++i) f.score += w[i] * f.features[i];
    for (const auto& app : f.derivation) {
      f.target.insert(f.target.end(), app.target.begin(), app.target.end());
    }
    scored.push_back(std::move(f));
  }
  std::stable_sort(scored.begin(), scored.end(),
                   [](const Final& a, const Final& b) { return a.score > b.score; });

  std::vector<std::string> seen_strings;
  for (auto& f : scored) {
    std::string key = join_tokens(f.target);
    if (std::find(seen_strings.begin(), seen_strings.end(), key) != seen_strings.end()) {
      continue;
    }
    seen_strings.push_back(key);
    if (result.nbest.empty()) {
      result.translation = f.target;
      result.score = f.score;
      result.derivation = f.derivation;
    }
    result.nbest.push_back({std::move(f.target), f.score, std::move(f.features)});
    if (static_cast<int>(result.nbest.size()) >= std::max(1, config.nbest_size)) break;
  }
  return result;
}

}  // namespace

DecodeResult decode(const Sentence& sentence, const DecoderConfig& config) {
  if (config.table == nullptr || config.lm == nullptr) {
    throw std::runtime_error("decode: table and lm must be set");
  }
  if (config.beam_size < 1) throw std::runtime_error("decode: beam_size must be >= 1");
  if (sentence.empty()) {
    DecodeResult result;
    Derivation empty;
    result.score = score_derivation(empty, config);
    result.nbest.push_back(
        {result.translation, result.score, derivation_features(empty, *config.lm)});
    return result;
  }
  if (sentence.size() > 63) {
    throw std::runtime_error("decode: sentences longer than 63 tokens are not supported");
  }
  DecodeResult result = decode_impl(sentence, config, config.distortion_limit);
  if (result.nbest.empty() && config.distortion_limit > 0) {
    // A finite limit can strand a gap behind the frontier; monotone decoding
    // always completes.
    result = decode_impl(sentence, config, 0);
  }
  return result;
}

}  // namespace premt
