#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mim/text/vocab.hpp"

namespace mim::text {

// Id sequence starting with CLS. word_index maps each position back to the
// source word (CLS gets -1); with word-level tokenization this is the
// position itself minus one, kept explicit so span accounting stays in word
// units.
struct TokenSequence {
  std::vector<std::int32_t> ids;
  std::vector<std::int32_t> word_index;

  std::size_t size() const { return ids.size(); }
};

// CLS + ids, OOV -> UNK, truncated to max_len. Throws on max_len < 2.
TokenSequence encode_sequence(const std::vector<std::string>& tokens,
                              const Vocabulary& vocab, int max_len);

// Inverse of encode_sequence over in-vocabulary tokens (CLS dropped).
std::vector<std::string> decode_sequence(const TokenSequence& seq,
                                         const Vocabulary& vocab);

// batch_size sequences padded to the batch max length. padding_mask is true
// exactly at PAD positions.
struct Batch {
  std::vector<const TokenSequence*> sequences;
  std::vector<std::int32_t> padded;  // row-major [batch x max_len]
  std::vector<std::uint8_t> padding_mask;
  int max_len = 0;

  int rows() const { return static_cast<int>(sequences.size()); }
};

struct BatchStats {
  std::size_t batches_emitted = 0;
  std::size_t sequences_dropped = 0;  // final partial batch
};

// Groups sequences in order into full batches; a final partial batch is
// dropped and recorded in stats. Throws on batch_size < 2 (in-batch
// negatives need at least two sequences).
std::vector<Batch> make_batches(const std::vector<TokenSequence>& sequences,
                                int batch_size, BatchStats* stats = nullptr);

}  // namespace mim::text
