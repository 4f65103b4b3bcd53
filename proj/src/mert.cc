#include "premt/mert.h"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <map>

#include "premt/eval.h"
#include "premt/util.h"

namespace premt {

namespace {

struct Candidate {
  std::vector<double> features;
  BleuStats stats;
};

using Pool = std::vector<std::vector<Candidate>>;  // per dev sentence

double dot(const std::vector<double>& w, const std::vector<double>& h) {
  double s = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * h[i];
  return s;
}

// Pool objective: smoothed corpus BLEU of the per-sentence argmax candidates.
double pool_objective(const Pool& pool, const std::vector<double>& weights) {
  BleuStats total;
  for (const auto& cands : pool) {
    if (cands.empty()) continue;
    int best = 0;
    double best_score = dot(weights, cands[0].features);
    for (std::size_t c = 1; c < cands.size(); ++c) {
      double s = dot(weights, cands[c].features);
      if (s > best_score) {
        best_score = s;
        best = static_cast<int>(c);
      }
    }
    total += cands[best].stats;
  }
  return bleu_smoothed_from_stats(total);
}

// Upper envelope of lines (intercept, slope) as gamma sweeps left to right.
struct EnvelopeSegment {
  double start;  // -inf for the first segment
  int candidate;
};

std::vector<EnvelopeSegment> upper_envelope(const std::vector<Candidate>& cands,
                                            const std::vector<double>& weights, int coord) {
  struct Line {
    double slope, intercept;
    int candidate;
  };
  std::vector<Line> lines;
  lines.reserve(cands.size());
  for (std::size_t c = 0; c < cands.size(); ++c) {
    double slope = cands[c].features[coord];
    double intercept = dot(weights, cands[c].features) - weights[coord] * slope;
    lines.push_back({slope, intercept, static_cast<int>(c)});
  }
  std::sort(lines.begin(), lines.end(), [](const Line& a, const Line& b) {
    if (a.slope != b.slope) return a.slope < b.slope;
    return a.intercept < b.intercept;
  });
  // Among equal slopes only the largest intercept can win.
  std::vector<Line> filtered;
  for (const auto& l : lines) {
    if (!filtered.empty() && filtered.back().slope == l.slope) filtered.back() = l;
    else filtered.push_back(l);
  }
  // Convex-hull scan.
  std::vector<Line> hull;
  std::vector<double> breaks;
  for (const auto& l : filtered) {
    while (!hull.empty()) {
      double x = (l.intercept - hull.back().intercept) / (hull.back().slope - l.slope);
      if (!breaks.empty() && x <= breaks.back()) {
        hull.pop_back();
        breaks.pop_back();
      } else {
        hull.push_back(l);
        breaks.push_back(x);
        break;
      }
    }
    if (hull.empty()) hull.push_back(l);
  }
  std::vector<EnvelopeSegment> segments;
  segments.push_back({-std::numeric_limits<double>::infinity(), hull[0].candidate});
  for (std::size_t i = 1; i < hull.size(); ++i) {
    segments.push_back({breaks[i - 1], hull[i].candidate});
  }
  return segments;
}

// Exact line search on one coordinate over the pool; returns the best value
// found and its objective.
std::pair<double, double> line_search(const Pool& pool, const std::vector<double>& weights,
                                      int coord) {
  struct Event {
    double x;
    int sentence;
    int candidate;
  };
  std::vector<Event> events;
  BleuStats total;
  std::map<int, int> selected;  // per-sentence candidate, updated in the sweep
  for (std::size_t s = 0; s < pool.size(); ++s) {
    if (pool[s].empty()) continue;
    std::vector<EnvelopeSegment> env = upper_envelope(pool[s], weights, coord);
    total += pool[s][env[0].candidate].stats;
    selected[static_cast<int>(s)] = env[0].candidate;
    for (std::size_t k = 1; k < env.size(); ++k) {
      events.push_back({env[k].start, static_cast<int>(s), env[k].candidate});
    }
  }
  std::sort(events.begin(), events.end(), [](const Event& a, const Event& b) {
    return a.x < b.x;
  });

  double best_gamma = events.empty() ? weights[coord] : events.front().x - 1.0;
  double best_obj = bleu_smoothed_from_stats(total);

  for (std::size_t i = 0; i < events.size();) {
    double x = events[i].x;
    while (i < events.size() && events[i].x == x) {
      int s = events[i].sentence;
      BleuStats minus = pool[s][selected[s]].stats;
      for (int n = 0; n < kBleuMaxOrder; ++n) {
        total.matches[n] -= minus.matches[n];
        total.totals[n] -= minus.totals[n];
      }
      total.hyp_len -= minus.hyp_len;
      total.ref_len -= minus.ref_len;
      selected[s] = events[i].candidate;
      total += pool[s][selected[s]].stats;
      ++i;
    }
    double next_x = i < events.size() ? events[i].x : x + 2.0;
    double gamma = 0.5 * (x + next_x);
    double obj = bleu_smoothed_from_stats(total);
    if (obj > best_obj) {
      best_obj = obj;
      best_gamma = gamma;
    }
  }
  return {best_gamma, best_obj};
}

// One full greedy pass over all coordinates from a starting point.
std::vector<double> coordinate_pass(const Pool& pool, std::vector<double> weights) {
  double incumbent = pool_objective(pool, weights);
  for (std::size_t coord = 0; coord < weights.size(); ++coord) {
    auto [gamma, obj] = line_search(pool, weights, static_cast<int>(coord));
    if (obj > incumbent + 1e-12) {
      weights[coord] = gamma;
      incumbent = obj;
    }
  }
  return weights;
}

}  // namespace

LogLinearWeights tune_weights(const ParallelCorpus& dev, const DecoderConfig& base,
                              const LogLinearWeights& initial, const MertOptions& opts) {
  if (dev.empty()) throw std::runtime_error("tune_weights: empty dev corpus");
  if (opts.rounds < 1) throw std::runtime_error("tune_weights: rounds must be >= 1");

  Rng rng(opts.seed);
  Pool pool(dev.size());
  // Dedup per sentence by target string.
  std::vector<std::map<std::string, int>> seen(dev.size());

  auto decode_and_accumulate = [&](const LogLinearWeights& weights) -> double {
    DecoderConfig config = base;
    config.weights = weights;
    config.nbest_size = opts.nbest_size;
    BleuStats corpus_stats;
    for (std::size_t s = 0; s < dev.size(); ++s) {
      DecodeResult result = decode(dev.pairs[s].source, config);
      corpus_stats += bleu_sentence_stats(result.translation, dev.pairs[s].target);
      for (const auto& cand : result.nbest) {
        std::string key = join_tokens(cand.translation);
        if (seen[s].count(key)) continue;
        seen[s][key] = static_cast<int>(pool[s].size());
        pool[s].push_back({cand.features,
                           bleu_sentence_stats(cand.translation, dev.pairs[s].target)});
      }
    }
    return bleu_from_stats(corpus_stats).bleu;
  };

  LogLinearWeights current = initial;
  LogLinearWeights best_weights = initial;
  double best_dev_bleu = -1.0;

  for (int round = 0; round < opts.rounds; ++round) {
    double dev_bleu = decode_and_accumulate(current);
    if (dev_bleu > best_dev_bleu) {
      best_dev_bleu = dev_bleu;
      best_weights = current;
    }
    if (opts.verbose) {
      std::cerr << "mert round " << round << ": dev bleu " << fmt_double(dev_bleu, 4)
                << '\n';
    }

    std::vector<std::vector<double>> starts = {current.lambdas};
    for (int r = 0; r < opts.restarts; ++r) {
      std::vector<double> random_start(current.lambdas.size());
      for (auto& v : random_start) v = rng.uniform(-1.0, 1.0);
      starts.push_back(std::move(random_start));
    }
    std::vector<double> round_best = current.lambdas;
    double round_best_obj = pool_objective(pool, round_best);
    for (const auto& start : starts) {
      std::vector<double> optimized = coordinate_pass(pool, start);
      double obj = pool_objective(pool, optimized);
      if (obj > round_best_obj + 1e-12) {
        round_best_obj = obj;
        round_best = optimized;
      }
    }
    current.lambdas = round_best;
  }
  double final_bleu = decode_and_accumulate(current);
  if (final_bleu > best_dev_bleu) {
    best_weights = current;
  }
  return best_weights;
}

}  // namespace premt
