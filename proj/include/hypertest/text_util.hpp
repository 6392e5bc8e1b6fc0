#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace hypertest {

struct Token {
  std::string text;
  int col = 1;  // 1-based
};

/// Whitespace tokenizer that keeps parenthesised groups together.
std::vector<Token> tokenize(std::string_view line, int col_offset = 0);
std::string strip_comment(std::string_view line);
std::string trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);
std::pair<std::string, std::string> split_kv(std::string_view tok);
bool is_identifier(std::string_view s);

std::optional<std::uint64_t> parse_uint(std::string_view s, int base);
/// Hex with optional 0x prefix.
std::optional<std::uint64_t> parse_hex(std::string_view s);
/// Decimal, or hex with a 0x prefix.
std::optional<std::uint64_t> parse_number(std::string_view s);
std::string hex(std::uint64_t v);

std::string read_file(const std::string& path);
/// Writes to a temporary file in the same directory, then renames.
void write_file_atomic(const std::string& path, std::string_view content);

std::string sha256_hex(std::string_view data);

}  // namespace hypertest
