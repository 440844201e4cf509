#include "bhavnet/dataset.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "bhavnet/error.hpp"
#include "bhavnet/text.hpp"

namespace bhavnet {

LabeledPair make_labeled_pair(std::string_view w1, std::string_view w2, Relation label, std::string language) {
  LabeledPair p{text::nfc(w1), text::nfc(w2), label, std::move(language)};
  if (p.w1.empty() || p.w2.empty()) throw InvalidInput("pair has an empty word");
  if (p.w1 == p.w2) throw InvalidInput("pair words are identical: '" + p.w1 + "'");
  if (label != Relation::synonym && label != Relation::antonym) throw InvalidInput("label must be 0 or 1");
  return p;
}

std::vector<LabeledPair> parse_pairs(std::string_view content, const std::string& language) {
  std::vector<LabeledPair> pairs;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < content.size()) {
    std::size_t end = content.find('\n', pos);
    if (end == std::string_view::npos) end = content.size();
    const std::string_view line = text::strip_cr(content.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;
    if (!text::is_valid_utf8(line)) throw EncodingError("invalid UTF-8", line_no);

    const auto fields = text::split(line, '\t');
    if (fields.size() != 3) {
      throw FormatError("expected 3 tab-separated columns, got " + std::to_string(fields.size()), line_no);
    }
    Relation label;
    if (fields[2] == "0") {
      label = Relation::synonym;
    } else if (fields[2] == "1") {
      label = Relation::antonym;
    } else {
      throw FormatError("label must be 0 or 1, got '" + std::string(fields[2]) + "'", line_no);
    }
    try {
      pairs.push_back(make_labeled_pair(fields[0], fields[1], label, language));
    } catch (const InvalidInput& e) {
      throw FormatError(e.what(), line_no);
    }
  }
  return pairs;
}

std::vector<LabeledPair> load_pairs(const std::filesystem::path& path, const std::string& language) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_pairs(buf.str(), language);
}

std::string format_pairs(std::span<const LabeledPair> pairs) {
  std::string out;
  for (const LabeledPair& p : pairs) out += p.w1 + "\t" + p.w2 + "\t" + std::to_string(label_value(p.label)) + "\n";
  return out;
}

FilterResult filter_resolvable(std::span<const LabeledPair> pairs, const EmbeddingTable& table) {
  FilterResult result;
  for (const LabeledPair& p : pairs) {
    if (table.contains(p.w1) && table.contains(p.w2)) {
      result.kept.push_back(p);
    } else {
      ++result.dropped;
    }
  }
  return result;
}

DataSplit stratified_split(std::span<const LabeledPair> pairs, SplitFractions fractions, Rng& rng) {
  const std::array<double, 3> f{fractions.train, fractions.dev, fractions.test};
  for (double x : f)
    if (!(x > 0.0)) throw ConfigError("split fractions must be positive");
  if (std::abs(f[0] + f[1] + f[2] - 1.0) > 1e-9) throw ConfigError("split fractions must sum to 1");

  std::array<std::vector<LabeledPair>, 3> parts;
  for (Relation cls : {Relation::synonym, Relation::antonym}) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < pairs.size(); ++i)
      if (pairs[i].label == cls) members.push_back(i);
    rng.shuffle(std::span<std::size_t>(members));

    const double n = static_cast<double>(members.size());
    std::array<std::size_t, 3> counts{};
    std::array<double, 3> remainder{};
    std::size_t assigned = 0;
    for (std::size_t k = 0; k < 3; ++k) {
      const double exact = n * f[k];
      counts[k] = static_cast<std::size_t>(std::floor(exact));
      remainder[k] = exact - std::floor(exact);
      assigned += counts[k];
    }
    std::array<std::size_t, 3> order{0, 1, 2};
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
    for (std::size_t k = 0; assigned < members.size(); ++k, ++assigned) ++counts[order[k % 3]];

    std::size_t offset = 0;
    for (std::size_t k = 0; k < 3; ++k) {
      if (counts[k] == 0) {
        throw ConfigError("split " + std::to_string(k) + " would get no pair labeled " +
                          std::to_string(label_value(cls)));
      }
      for (std::size_t i = 0; i < counts[k]; ++i) parts[k].push_back(pairs[members[offset + i]]);
      offset += counts[k];
    }
  }
  for (auto& part : parts) rng.shuffle(std::span<LabeledPair>(part));
  return {std::move(parts[0]), std::move(parts[1]), std::move(parts[2])};
}

BatchSampler::BatchSampler(std::size_t n, std::size_t batch_size) : n_(n), batch_size_(batch_size) {
  if (n_ == 0) throw ConfigError("cannot batch an empty dataset");
  if (batch_size_ < 2) throw ConfigError("batch size must be at least 2");
}

std::vector<std::vector<std::size_t>> BatchSampler::epoch(Rng& rng) const {
  std::vector<std::size_t> order(n_);
  std::iota(order.begin(), order.end(), std::size_t{0});
  rng.shuffle(std::span<std::size_t>(order));
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t start = 0; start < n_; start += batch_size_) {
    const std::size_t stop = std::min(n_, start + batch_size_);
    out.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start), order.begin() + static_cast<std::ptrdiff_t>(stop));
  }
  return out;
}

std::vector<std::vector<LabeledPair>> batches(std::span<const LabeledPair> pairs, std::size_t batch_size, Rng& rng) {
  const BatchSampler sampler(pairs.size(), batch_size);
  std::vector<std::vector<LabeledPair>> out;
  for (const auto& idx : sampler.epoch(rng)) {
    auto& batch = out.emplace_back();
    for (std::size_t i : idx) batch.push_back(pairs[i]);
  }
  return out;
}

std::map<std::string, LabelCounts> count_by_language(std::span<const LabeledPair> pairs) {
  std::map<std::string, LabelCounts> counts;
  for (const LabeledPair& p : pairs) {
    auto& c = counts[p.language];
    (p.label == Relation::antonym ? c.antonyms : c.synonyms) += 1;
  }
  return counts;
}

}  // namespace bhavnet
