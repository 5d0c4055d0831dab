#include "mim/text/vocab.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace mim::text {

namespace {

const char* kSpecialNames[Vocabulary::kNumSpecials] = {"<pad>", "<unk>",
                                                       "<cls>", "<sep>",
                                                       "<mask>"};

}  // namespace

Vocabulary Vocabulary::build(
    const std::vector<std::vector<std::string>>& corpus,
    std::int64_t min_count) {
  std::unordered_map<std::string, std::int64_t> counts;
  std::int64_t total = 0;
  for (const auto& sentence : corpus) {
    for (const auto& tok : sentence) {
      ++counts[tok];
      ++total;
    }
  }
  if (total == 0) {
    throw std::runtime_error("Vocabulary::build: empty corpus");
  }

  // Deterministic id order: count descending, then lexicographic.
  std::vector<std::pair<std::string, std::int64_t>> kept;
  kept.reserve(counts.size());
  for (auto& [tok, c] : counts) {
    if (c >= min_count) kept.emplace_back(tok, c);
  }
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });

  Vocabulary v;
  for (int i = 0; i < kNumSpecials; ++i) {
    v.types_.emplace_back(kSpecialNames[i]);
    v.counts_.push_back(0);
    v.ids_[kSpecialNames[i]] = i;
  }
  for (auto& [tok, c] : kept) {
    v.ids_[tok] = static_cast<std::int32_t>(v.types_.size());
    v.types_.push_back(tok);
    v.counts_.push_back(c);
  }
  return v;
}

std::int32_t Vocabulary::id(std::string_view token) const {
  auto it = ids_.find(std::string(token));
  return it == ids_.end() ? kUnk : it->second;
}

void Vocabulary::save(std::ostream& out) const {
  for (std::size_t i = 0; i < types_.size(); ++i) {
    out << types_[i] << '\t' << counts_[i] << '\n';
  }
}

Vocabulary Vocabulary::load(std::istream& in) {
  Vocabulary v;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw std::runtime_error("Vocabulary::load: malformed line: " + line);
    }
    const std::string tok = line.substr(0, tab);
    const std::int64_t c = std::stoll(line.substr(tab + 1));
    v.ids_[tok] = static_cast<std::int32_t>(v.types_.size());
    v.types_.push_back(tok);
    v.counts_.push_back(c);
  }
  if (v.size() < kNumSpecials) {
    throw std::runtime_error("Vocabulary::load: missing special symbols");
  }
  for (int i = 0; i < kNumSpecials; ++i) {
    if (v.types_[static_cast<std::size_t>(i)] != kSpecialNames[i]) {
      throw std::runtime_error("Vocabulary::load: specials out of order");
    }
  }
  return v;
}

UnigramDistribution::UnigramDistribution(const Vocabulary& vocab,
                                         double power) {
  if (power < 0.0) {
    throw std::invalid_argument("UnigramDistribution: power must be >= 0");
  }
  const std::int32_t v = vocab.size();
  probs_.assign(static_cast<std::size_t>(v), 0.0);
  double total = 0.0;
  for (std::int32_t i = Vocabulary::kNumSpecials; i < v; ++i) {
    const double w = std::pow(static_cast<double>(vocab.count(i)), power);
    probs_[static_cast<std::size_t>(i)] = w;
    total += w;
  }
  if (total <= 0.0) {
    throw std::invalid_argument(
        "UnigramDistribution: vocabulary has no sampleable types");
  }
  cumulative_.reserve(static_cast<std::size_t>(v) -
                      Vocabulary::kNumSpecials);
  double acc = 0.0;
  for (std::int32_t i = Vocabulary::kNumSpecials; i < v; ++i) {
    probs_[static_cast<std::size_t>(i)] /= total;
    acc += probs_[static_cast<std::size_t>(i)];
    cumulative_.push_back(acc);
  }
  cumulative_.back() = 1.0;
}

std::int32_t UnigramDistribution::sample(core::Rng& rng) const {
  const double u = rng.uniform();
  const auto it =
      std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  const std::size_t offset = static_cast<std::size_t>(
      std::min<std::ptrdiff_t>(it - cumulative_.begin(),
                               static_cast<std::ptrdiff_t>(cumulative_.size()) - 1));
  return Vocabulary::kNumSpecials + static_cast<std::int32_t>(offset);
}

}  // namespace mim::text
