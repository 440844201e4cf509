#include "bhavnet/embeddings.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "bhavnet/error.hpp"
#include "bhavnet/text.hpp"

namespace bhavnet {
namespace {

bool parse_double(std::string_view s, double& out) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

bool parse_size(std::string_view s, std::size_t& out) {
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

EmbeddingTable::EmbeddingTable(std::size_t dim, std::string language) : dim_(dim), language_(std::move(language)) {
  if (dim_ == 0) throw FormatError("embedding dimension must be positive");
}

bool EmbeddingTable::insert(std::string_view token, std::span<const double> vector) {
  if (vector.size() != dim_) {
    throw DimensionError("embedding for '" + std::string(token) + "' has " + std::to_string(vector.size()) +
                         " values, table dim is " + std::to_string(dim_));
  }
  for (double v : vector)
    if (!std::isfinite(v)) throw FormatError("non-finite value in embedding for '" + std::string(token) + "'");
  std::string key = text::nfc(token);
  if (auto it = index_.find(key); it != index_.end()) {
    std::copy(vector.begin(), vector.end(), storage_.begin() + static_cast<std::ptrdiff_t>(it->second * dim_));
    ++duplicates_;
    return true;
  }
  index_.emplace(key, tokens_.size());
  tokens_.push_back(std::move(key));
  storage_.insert(storage_.end(), vector.begin(), vector.end());
  return false;
}

std::optional<std::span<const double>> EmbeddingTable::find(std::string_view token) const {
  const auto it = index_.find(text::nfc(token));
  if (it == index_.end()) return std::nullopt;
  return std::span<const double>(storage_).subspan(it->second * dim_, dim_);
}

bool EmbeddingTable::contains(std::string_view token) const { return find(token).has_value(); }

std::span<const double> EmbeddingTable::lookup(std::string_view token) const {
  if (auto v = find(token)) return *v;
  throw VocabularyError(std::string(token));
}

EmbeddingTable parse_embeddings(std::string_view content, std::string language,
                                std::optional<std::size_t> expected_dim) {
  std::optional<EmbeddingTable> table;
  std::optional<std::size_t> header_count;
  std::size_t rows = 0;
  std::size_t line_no = 0;
  std::vector<double> values;
  std::size_t pos = 0;

  while (pos < content.size()) {
    std::size_t end = content.find('\n', pos);
    if (end == std::string_view::npos) end = content.size();
    const std::string_view line = text::strip_cr(content.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;

    if (!text::is_valid_utf8(line)) throw EncodingError("invalid UTF-8", line_no);
    const auto fields = text::split_whitespace(line);
    if (fields.empty()) continue;

    if (!table && rows == 0 && !header_count && fields.size() == 2) {
      std::size_t count = 0, dim = 0;
      if (parse_size(fields[0], count) && parse_size(fields[1], dim)) {
        if (dim == 0) throw FormatError("header declares dimension 0", line_no);
        if (expected_dim && *expected_dim != dim) {
          throw FormatError("header dimension " + std::to_string(dim) + " differs from expected " +
                                std::to_string(*expected_dim),
                            line_no);
        }
        header_count = count;
        table.emplace(dim, language);
        continue;
      }
    }

    const std::size_t dim = fields.size() - 1;
    if (dim == 0) throw FormatError("line has a token but no vector", line_no);
    if (!table) {
      if (expected_dim && *expected_dim != dim) {
        throw FormatError("vector has " + std::to_string(dim) + " values, expected " + std::to_string(*expected_dim),
                          line_no);
      }
      table.emplace(dim, language);
    }
    if (dim != table->dim()) {
      throw FormatError("vector has " + std::to_string(dim) + " values, expected " + std::to_string(table->dim()),
                        line_no);
    }
    values.resize(dim);
    for (std::size_t i = 0; i < dim; ++i) {
      if (!parse_double(fields[i + 1], values[i]) || !std::isfinite(values[i])) {
        throw FormatError("bad number '" + std::string(fields[i + 1]) + "'", line_no);
      }
    }
    table->insert(fields[0], values);
    ++rows;
  }

  if (!table || rows == 0) throw FormatError("embedding file contains no vectors");
  if (header_count && *header_count != rows) {
    throw FormatError("header declares " + std::to_string(*header_count) + " vectors, file has " +
                      std::to_string(rows));
  }
  return std::move(*table);
}

EmbeddingTable load_embeddings(const std::filesystem::path& path, std::string language,
                               std::optional<std::size_t> expected_dim) {
  return parse_embeddings(read_file(path), std::move(language), expected_dim);
}

std::string format_embeddings(const EmbeddingTable& table) {
  std::string out = std::to_string(table.size()) + " " + std::to_string(table.dim()) + "\n";
  char buf[64];
  for (const std::string& token : table.tokens()) {
    out += token;
    for (double v : table.lookup(token)) {
      const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
      out += ' ';
      out.append(buf, ptr);
    }
    out += '\n';
  }
  return out;
}

void write_embeddings(const EmbeddingTable& table, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot write " + path.string());
  out << format_embeddings(table);
}

}  // namespace bhavnet
