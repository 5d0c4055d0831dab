#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "mim/core/rng.hpp"

namespace mim::text {

// Word-type <-> id map with counts. Ids are dense in [0, V) with the special
// symbols first; everything below min_count maps to UNK at encode time.
class Vocabulary {
 public:
  static constexpr std::int32_t kPad = 0;
  static constexpr std::int32_t kUnk = 1;
  static constexpr std::int32_t kCls = 2;
  static constexpr std::int32_t kSep = 3;
  static constexpr std::int32_t kMask = 4;
  static constexpr std::int32_t kNumSpecials = 5;

  // Counts word types from already-tokenized sentences. Throws
  // std::runtime_error on an empty corpus.
  static Vocabulary build(const std::vector<std::vector<std::string>>& corpus,
                          std::int64_t min_count);

  std::int32_t size() const { return static_cast<std::int32_t>(types_.size()); }

  // UNK for out-of-vocabulary tokens.
  std::int32_t id(std::string_view token) const;
  const std::string& token(std::int32_t id) const { return types_.at(static_cast<std::size_t>(id)); }
  std::int64_t count(std::int32_t id) const { return counts_.at(static_cast<std::size_t>(id)); }

  static bool is_special(std::int32_t id) { return id < kNumSpecials; }

  void save(std::ostream& out) const;
  static Vocabulary load(std::istream& in);

 private:
  std::vector<std::string> types_;
  std::vector<std::int64_t> counts_;
  std::unordered_map<std::string, std::int32_t> ids_;
};

// p(w) proportional to count(w)^power over non-special types; specials have
// probability exactly zero.
class UnigramDistribution {
 public:
  UnigramDistribution(const Vocabulary& vocab, double power);

  double prob(std::int32_t id) const { return probs_.at(static_cast<std::size_t>(id)); }
  // Never returns a special id.
  std::int32_t sample(core::Rng& rng) const;

 private:
  std::vector<double> probs_;
  std::vector<double> cumulative_;  // over non-special ids
};

}  // namespace mim::text
