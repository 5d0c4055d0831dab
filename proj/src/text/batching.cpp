#include "mim/text/batching.hpp"

#include <algorithm>
#include <stdexcept>

namespace mim::text {

TokenSequence encode_sequence(const std::vector<std::string>& tokens,
                              const Vocabulary& vocab, int max_len) {
  if (max_len < 2) {
    throw std::invalid_argument("encode_sequence: max_len must be >= 2");
  }
  TokenSequence seq;
  seq.ids.push_back(Vocabulary::kCls);
  seq.word_index.push_back(-1);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (seq.ids.size() >= static_cast<std::size_t>(max_len)) break;
    seq.ids.push_back(vocab.id(tokens[i]));
    seq.word_index.push_back(static_cast<std::int32_t>(i));
  }
  return seq;
}

std::vector<std::string> decode_sequence(const TokenSequence& seq,
                                         const Vocabulary& vocab) {
  std::vector<std::string> out;
  for (std::size_t i = 1; i < seq.ids.size(); ++i) {
    out.push_back(vocab.token(seq.ids[i]));
  }
  return out;
}

std::vector<Batch> make_batches(const std::vector<TokenSequence>& sequences,
                                int batch_size, BatchStats* stats) {
  if (batch_size < 2) {
    throw std::invalid_argument("make_batches: batch_size must be >= 2");
  }
  std::vector<Batch> out;
  const std::size_t full =
      sequences.size() / static_cast<std::size_t>(batch_size);
  for (std::size_t b = 0; b < full; ++b) {
    Batch batch;
    int max_len = 0;
    for (int i = 0; i < batch_size; ++i) {
      const TokenSequence& seq =
          sequences[b * static_cast<std::size_t>(batch_size) +
                    static_cast<std::size_t>(i)];
      batch.sequences.push_back(&seq);
      max_len = std::max(max_len, static_cast<int>(seq.size()));
    }
    batch.max_len = max_len;
    batch.padded.assign(
        static_cast<std::size_t>(batch_size) * static_cast<std::size_t>(max_len),
        Vocabulary::kPad);
    batch.padding_mask.assign(batch.padded.size(), 1);
    for (int i = 0; i < batch_size; ++i) {
      const TokenSequence& seq = *batch.sequences[static_cast<std::size_t>(i)];
      for (std::size_t j = 0; j < seq.size(); ++j) {
        const std::size_t at =
            static_cast<std::size_t>(i) * static_cast<std::size_t>(max_len) + j;
        batch.padded[at] = seq.ids[j];
        batch.padding_mask[at] = 0;
      }
    }
    out.push_back(std::move(batch));
  }
  if (stats) {
    stats->batches_emitted += out.size();
    stats->sequences_dropped +=
        sequences.size() - full * static_cast<std::size_t>(batch_size);
  }
  return out;
}

}  // namespace mim::text
