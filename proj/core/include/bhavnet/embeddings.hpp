#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace bhavnet {

/// Frozen token -> vector lookup for one language.
///
/// Tokens are stored NFC-normalized; lookups normalize their argument the
/// same way, so precomposed and decomposed spellings resolve identically.
class EmbeddingTable {
 public:
  EmbeddingTable(std::size_t dim, std::string language = {});

  std::size_t dim() const noexcept { return dim_; }
  const std::string& language() const noexcept { return language_; }
  std::size_t size() const noexcept { return tokens_.size(); }

  // Returns true when an existing entry was replaced (last one wins).
  bool insert(std::string_view token, std::span<const double> vector);
  bool contains(std::string_view token) const;
  std::optional<std::span<const double>> find(std::string_view token) const;
  // Throws VocabularyError naming the token.
  std::span<const double> lookup(std::string_view token) const;

  // Tokens in first-insertion order.
  const std::vector<std::string>& tokens() const noexcept { return tokens_; }
  std::size_t duplicates_replaced() const noexcept { return duplicates_; }

 private:
  std::size_t dim_;
  std::string language_;
  std::vector<std::string> tokens_;
  std::vector<double> storage_;
  std::unordered_map<std::string, std::size_t> index_;
  std::size_t duplicates_ = 0;
};

/// Reads the plain-text vector format: one `token v1 ... vd` per line,
/// optionally preceded by a `count dim` header. LF and CRLF are accepted.
/// Throws FormatError (ragged rows, bad numbers, empty file) or
/// EncodingError (invalid UTF-8), both carrying the line number.
EmbeddingTable load_embeddings(const std::filesystem::path& path, std::string language = {},
                               std::optional<std::size_t> expected_dim = std::nullopt);
EmbeddingTable parse_embeddings(std::string_view content, std::string language = {},
                                std::optional<std::size_t> expected_dim = std::nullopt);

// Writes with a header line and shortest round-trip decimal floats.
void write_embeddings(const EmbeddingTable& table, const std::filesystem::path& path);
std::string format_embeddings(const EmbeddingTable& table);

}  // namespace bhavnet
