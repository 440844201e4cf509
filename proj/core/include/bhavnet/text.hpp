#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace bhavnet::text {

bool is_valid_utf8(std::string_view s);

// Unicode NFC. Input must be valid UTF-8 (throws EncodingError otherwise).
// No case folding or lemmatization is applied.
std::string nfc(std::string_view s);

// Splits on runs of ASCII spaces/tabs.
std::vector<std::string_view> split_whitespace(std::string_view line);
std::vector<std::string_view> split(std::string_view line, char sep);

// Drops a trailing '\r' so CRLF files read like LF files.
std::string_view strip_cr(std::string_view line);

}  // namespace bhavnet::text
