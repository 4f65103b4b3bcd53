#include "premt/combine.h"

#include <stdexcept>

#include "premt/util.h"

namespace premt {

void MarkingScheme::validate() const {
  if (pbmt_prefix.empty() || source_prefix.empty()) {
    throw std::runtime_error("marking scheme: prefixes must be nonempty");
  }
  if (pbmt_prefix == source_prefix) {
    throw std::runtime_error("marking scheme: prefixes must be distinct");
  }
}

namespace {

bool has_prefix(const std::string& token, const std::string& prefix) {
  return token.rfind(prefix, 0) == 0;
}

void check_unmarked(const Sentence& sentence, const MarkingScheme& scheme,
                    const char* which) {
  for (const auto& tok : sentence) {
    if (has_prefix(tok, scheme.pbmt_prefix) || has_prefix(tok, scheme.source_prefix)) {
      throw std::runtime_error(std::string("build_mixed_input: ") + which + " token \"" +
                               tok + "\" already carries a marking prefix");
    }
  }
}

}  // namespace

MixedInput build_mixed_input(const Sentence& source, const Sentence& pretranslation,
                             const MarkingScheme& scheme) {
  scheme.validate();
  if (source.empty() || pretranslation.empty()) {
    throw std::runtime_error("build_mixed_input: both sentences must be nonempty");
  }
  check_unmarked(pretranslation, scheme, "pre-translation");
  check_unmarked(source, scheme, "source");
  MixedInput mixed;
  mixed.tokens.reserve(pretranslation.size() + source.size());
  for (const auto& tok : pretranslation) mixed.tokens.push_back(scheme.pbmt_prefix + tok);
  for (const auto& tok : source) mixed.tokens.push_back(scheme.source_prefix + tok);
  mixed.boundary = pretranslation.size();
  return mixed;
}

std::pair<Sentence, Sentence> split_mixed_input(const MixedInput& mixed,
                                                const MarkingScheme& scheme) {
  Sentence pretranslation, source;
  for (std::size_t i = 0; i < mixed.tokens.size(); ++i) {
    const std::string& tok = mixed.tokens[i];
    if (i < mixed.boundary) {
      if (!has_prefix(tok, scheme.pbmt_prefix)) {
        throw std::runtime_error("split_mixed_input: unmarked pre-translation token: " + tok);
      }
      pretranslation.push_back(tok.substr(scheme.pbmt_prefix.size()));
    } else {
      if (!has_prefix(tok, scheme.source_prefix)) {
        throw std::runtime_error("split_mixed_input: unmarked source token: " + tok);
      }
      source.push_back(tok.substr(scheme.source_prefix.size()));
    }
  }
  return {pretranslation, source};
}

Sentence apply_bpe_marked(const Sentence& marked, const MergeTable& merges,
                          const MarkingScheme& scheme) {
  Sentence out;
  for (const auto& tok : marked) {
    std::string prefix, stem = tok;
    if (has_prefix(tok, scheme.pbmt_prefix)) {
      prefix = scheme.pbmt_prefix;
    } else if (has_prefix(tok, scheme.source_prefix)) {
      prefix = scheme.source_prefix;
    }
    stem = tok.substr(prefix.size());
    Sentence units = apply_bpe(Sentence{stem}, merges);
    units[0] = prefix + units[0];
    out.insert(out.end(), units.begin(), units.end());
  }
  return out;
}

ParallelCorpus pretranslate_corpus(const ParallelCorpus& corpus, const DecoderConfig& smt,
                                   bool filter) {
  PhraseTable filtered;
  DecoderConfig config = smt;
  if (filter) {
    filtered = filter_singletons(*smt.table);
    config.table = &filtered;
  }
  ParallelCorpus out;
  out.pairs.reserve(corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    try {
      DecodeResult result = decode(corpus.pairs[i].source, config);
      out.pairs.push_back({result.translation, corpus.pairs[i].target});
    } catch (const std::exception& e) {
      throw std::runtime_error("pretranslate_corpus: sentence " + std::to_string(i + 1) +
                               ": " + e.what());
    }
  }
  return out;
}

namespace {

[[noreturn]] void stage_error(const char* stage, const std::exception& e) {
  throw std::runtime_error(std::string("stage ") + stage + ": " + e.what());
}

}  // namespace

Sentence pipeline_translate(const Sentence& source, const PipelineSystem& system) {
  Sentence pretranslation;
  try {
    pretranslation = decode(source, *system.smt).translation;
  } catch (const std::exception& e) {
    stage_error("pbmt", e);
  }
  Sentence bpe_input;
  try {
    bpe_input = apply_bpe(pretranslation, *system.merges);
  } catch (const std::exception& e) {
    stage_error("bpe", e);
  }
  try {
    if (bpe_input.empty()) return {};
    int max_len = 2 * static_cast<int>(bpe_input.size()) + 10;
    SentenceTranslation nmt_out =
        translate_sentence({system.mono_nmt}, bpe_input, *system.nmt_src_vocab,
                           *system.nmt_tgt_vocab, system.beam_size, max_len);
    return undo_bpe(nmt_out.tokens, system.merges->marker);
  } catch (const std::exception& e) {
    stage_error("nmt", e);
  }
}

MixedTranslation mixed_translate(const Sentence& source, const MixedSystem& system) {
  Sentence pretranslation;
  try {
    pretranslation = decode(source, *system.smt).translation;
  } catch (const std::exception& e) {
    stage_error("pbmt", e);
  }
  MixedTranslation out;
  try {
    MixedInput mixed = build_mixed_input(source, pretranslation, system.scheme);
    out.bpe_input = apply_bpe_marked(mixed.tokens, *system.merges, system.scheme);
  } catch (const std::exception& e) {
    stage_error("mix", e);
  }
  try {
    int max_len = 2 * static_cast<int>(source.size()) + 10;
    SentenceTranslation nmt_out =
        translate_sentence({system.mixed_nmt}, out.bpe_input, *system.nmt_src_vocab,
                           *system.nmt_tgt_vocab, system.beam_size, max_len);
    out.tokens = undo_bpe(nmt_out.tokens, system.merges->marker);
    out.attention = std::move(nmt_out.attention);
    return out;
  } catch (const std::exception& e) {
    stage_error("nmt", e);
  }
}

}  // namespace premt
