#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bhavnet/embeddings.hpp"
#include "bhavnet/rng.hpp"

namespace bhavnet {

enum class Relation : int { synonym = 0, antonym = 1 };

inline int label_value(Relation r) noexcept { return static_cast<int>(r); }

struct LabeledPair {
  std::string w1;
  std::string w2;
  Relation label = Relation::synonym;
  std::string language;

  bool operator==(const LabeledPair&) const = default;
};

// Validates the invariants (distinct non-empty NFC tokens) and normalizes.
LabeledPair make_labeled_pair(std::string_view w1, std::string_view w2, Relation label, std::string language = {});

/// Parses `w1 <TAB> w2 <TAB> label` lines, label 0 (synonym) or 1 (antonym).
/// Blank lines are skipped; anything else malformed is a FormatError with
/// its line number.
std::vector<LabeledPair> load_pairs(const std::filesystem::path& path, const std::string& language);
std::vector<LabeledPair> parse_pairs(std::string_view content, const std::string& language);
std::string format_pairs(std::span<const LabeledPair> pairs);

struct FilterResult {
  std::vector<LabeledPair> kept;
  std::size_t dropped = 0;
};

// Out-of-vocabulary pairs are dropped and counted, never given random vectors.
FilterResult filter_resolvable(std::span<const LabeledPair> pairs, const EmbeddingTable& table);

struct SplitFractions {
  double train = 0.8;
  double dev = 0.1;
  double test = 0.1;
};

struct DataSplit {
  std::vector<LabeledPair> train;
  std::vector<LabeledPair> dev;
  std::vector<LabeledPair> test;
};

/// Per-class largest-remainder allocation, so each split's class counts are
/// within one pair of the global proportion. Throws ConfigError when the
/// fractions are not positive or do not sum to 1, or when some split would
/// receive no pair of some class.
DataSplit stratified_split(std::span<const LabeledPair> pairs, SplitFractions fractions, Rng& rng);

/// Per-epoch shuffled partition of [0, n) into batches of at most
/// batch_size; only the last batch may be short.
class BatchSampler {
 public:
  BatchSampler(std::size_t n, std::size_t batch_size);

  std::vector<std::vector<std::size_t>> epoch(Rng& rng) const;
  std::size_t batches_per_epoch() const noexcept { return (n_ + batch_size_ - 1) / batch_size_; }
  std::size_t size() const noexcept { return n_; }

 private:
  std::size_t n_;
  std::size_t batch_size_;
};

std::vector<std::vector<LabeledPair>> batches(std::span<const LabeledPair> pairs, std::size_t batch_size, Rng& rng);

struct LabelCounts {
  std::size_t synonyms = 0;
  std::size_t antonyms = 0;
};
std::map<std::string, LabelCounts> count_by_language(std::span<const LabeledPair> pairs);

}  // namespace bhavnet
