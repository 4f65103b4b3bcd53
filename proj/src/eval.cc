#include "premt/eval.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "premt/util.h"

namespace premt {

BleuStats& BleuStats::operator+=(const BleuStats& other) {
  for (int n = 0; n < kBleuMaxOrder; ++n) {
    matches[n] += other.matches[n];
    totals[n] += other.totals[n];
  }
  hyp_len += other.hyp_len;
  ref_len += other.ref_len;
  return *this;
}

namespace {

// N-grams as joined strings; tokens contain no whitespace so '\x1f' is safe.
std::map<std::string, std::int64_t> ngram_counts(const Sentence& sent, int n) {
  std::map<std::string, std::int64_t> counts;
  if (static_cast<int>(sent.size()) < n) return counts;
  for (std::size_t i = 0; i + n <= sent.size(); ++i) {
    std::string key = sent[i];
    for (int k = 1; k < n; ++k) {
      key += '\x1f';
      key += sent[i + k];
    }
    ++counts[key];
  }
  return counts;
}

}  // namespace

BleuStats bleu_sentence_stats(const Sentence& hyp, const Sentence& ref) {
  BleuStats stats;
  stats.hyp_len = static_cast<std::int64_t>(hyp.size());
  stats.ref_len = static_cast<std::int64_t>(ref.size());
  for (int n = 1; n <= kBleuMaxOrder; ++n) {
    auto hyp_counts = ngram_counts(hyp, n);
    auto ref_counts = ngram_counts(ref, n);
    std::int64_t total = 0, matched = 0;
    for (const auto& [gram, count] : hyp_counts) {
      total += count;
      auto it = ref_counts.find(gram);
      if (it != ref_counts.end()) matched += std::min(count, it->second);
    }
    stats.totals[n - 1] = total;
    stats.matches[n - 1] = matched;
  }
  return stats;
}

BleuReport bleu_from_stats(const BleuStats& stats) {
  BleuReport report;
  report.hyp_len = stats.hyp_len;
  report.ref_len = stats.ref_len;
  if (stats.hyp_len == 0) return report;
  report.brevity_penalty =
      std::min(1.0, std::exp(1.0 - static_cast<double>(stats.ref_len) /
                                       static_cast<double>(stats.hyp_len)));
  double log_sum = 0.0;
  bool zero = false;
  for (int n = 0; n < kBleuMaxOrder; ++n) {
    double p = stats.totals[n] > 0
                   ? static_cast<double>(stats.matches[n]) / static_cast<double>(stats.totals[n])
                   : 0.0;
    report.precisions[n] = p;
    if (p <= 0.0) zero = true;
    else log_sum += std::log(p);
  }
  report.bleu = zero ? 0.0 : report.brevity_penalty * std::exp(log_sum / kBleuMaxOrder);
  return report;
}

BleuReport bleu(const std::vector<Sentence>& hypotheses,
                const std::vector<Sentence>& references) {
  if (hypotheses.size() != references.size()) {
    throw std::runtime_error("bleu: " + std::to_string(hypotheses.size()) +
                             " hypotheses vs " + std::to_string(references.size()) +
                             " references");
  }
  BleuStats stats;
  for (std::size_t i = 0; i < hypotheses.size(); ++i) {
    stats += bleu_sentence_stats(hypotheses[i], references[i]);
  }
  return bleu_from_stats(stats);
}

double bleu_smoothed_from_stats(const BleuStats& stats) {
  if (stats.hyp_len == 0) return 0.0;
  double bp = std::min(1.0, std::exp(1.0 - static_cast<double>(stats.ref_len) /
                                               static_cast<double>(stats.hyp_len)));
  double log_sum = 0.0;
  for (int n = 0; n < kBleuMaxOrder; ++n) {
    double add = n > 0 ? 1.0 : 0.0;
    double denom = static_cast<double>(stats.totals[n]) + add;
    double num = static_cast<double>(stats.matches[n]) + add;
    if (denom <= 0.0 || num <= 0.0) return 0.0;
    log_sum += std::log(num / denom);
  }
  return bp * std::exp(log_sum / kBleuMaxOrder);
}

double sentence_bleu_smoothed(const Sentence& hyp, const Sentence& ref) {
  return bleu_smoothed_from_stats(bleu_sentence_stats(hyp, ref));
}

Sentence unk_replace(const Sentence& sentence, const Vocabulary& counts,
                     std::int64_t threshold) {
  if (threshold < 1) throw std::runtime_error("unk_replace: threshold must be >= 1");
  Sentence out;
  out.reserve(sentence.size());
  for (const auto& tok : sentence) {
    if (tok != kUnkToken && counts.count(tok) < threshold) {
      out.push_back(kUnkToken);
    } else {
      out.push_back(tok);
    }
  }
  return out;
}

std::vector<Sentence> unk_replace(const std::vector<Sentence>& sentences,
                                  const Vocabulary& counts, std::int64_t threshold) {
  std::vector<Sentence> out;
  out.reserve(sentences.size());
  for (const auto& s : sentences) out.push_back(unk_replace(s, counts, threshold));
  return out;
}

std::string FrequencyBucketReport::to_tsv() const {
  std::ostringstream ss;
  ss << "N\tsystem\tbleu\tnormalized\tunk_count\n";
  for (std::size_t t = 0; t < thresholds.size(); ++t) {
    for (std::size_t s = 0; s < systems.size(); ++s) {
      const FrequencySweepCell& cell = cells[t][s];
      ss << thresholds[t] << '\t' << systems[s] << '\t' << fmt_double(cell.bleu) << '\t'
         << (cell.normalized_available ? fmt_double(cell.normalized) : "n/a") << '\t'
         << unk_counts[t] << '\n';
    }
  }
  return ss.str();
}

FrequencyBucketReport frequency_sweep(const std::vector<NamedSystem>& systems,
                                      const std::vector<Sentence>& references,
                                      const Vocabulary& counts,
                                      const std::vector<std::int64_t>& thresholds,
                                      const std::string& normalize_to) {
  int ref_index = -1;
  for (std::size_t s = 0; s < systems.size(); ++s) {
    if (systems[s].hypotheses.size() != references.size()) {
      throw std::runtime_error("frequency_sweep: system " + systems[s].name +
                               " hypothesis count mismatch");
    }
    if (systems[s].name == normalize_to) ref_index = static_cast<int>(s);
  }
  if (ref_index < 0) {
    throw std::runtime_error("frequency_sweep: normalize_to system \"" + normalize_to +
                             "\" not present");
  }

  FrequencyBucketReport report;
  report.thresholds = thresholds;
  for (const auto& sys : systems) report.systems.push_back(sys.name);

  for (std::int64_t threshold : thresholds) {
    std::vector<Sentence> repl_refs = unk_replace(references, counts, threshold);
    std::int64_t unk_count = 0;
    for (const auto& s : repl_refs) {
      for (const auto& tok : s) {
        if (tok == kUnkToken) ++unk_count;
      }
    }
    std::vector<FrequencySweepCell> row(systems.size());
    for (std::size_t s = 0; s < systems.size(); ++s) {
      std::vector<Sentence> repl_hyps = unk_replace(systems[s].hypotheses, counts, threshold);
      row[s].bleu = bleu(repl_hyps, repl_refs).bleu;
    }
    double base = row[ref_index].bleu;
    for (auto& cell : row) {
      if (base > 0.0) {
        cell.normalized = cell.bleu / base;
        cell.normalized_available = true;
      } else {
        cell.normalized = 0.0;
        cell.normalized_available = false;
      }
    }
    report.cells.push_back(std::move(row));
    report.unk_counts.push_back(unk_count);
  }
  return report;
}

}  // namespace premt
