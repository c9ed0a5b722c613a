#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace retsyn {

// Byte-preserving UTF-8 helpers. Decoding is lenient: an invalid lead or a
// truncated sequence is treated as a single one-byte code point, so slicing
// at code point boundaries never alters the underlying bytes.

// Number of bytes consumed by the code point starting at `pos`.
std::size_t cp_size_at(std::string_view text, std::size_t pos);

// Byte offsets of every code point start, plus text.size() as a sentinel.
std::vector<std::size_t> cp_offsets(std::string_view text);

// Count of code points.
std::size_t cp_len(std::string_view text);

// Decode the code point starting at `pos` (invalid bytes map to their value).
char32_t cp_at(std::string_view text, std::size_t pos);

std::u32string decode_utf8(std::string_view text);
std::string encode_utf8(char32_t cp);
std::string encode_utf8(std::u32string_view text);

// First `n` code points as a byte slice of the input.
std::string_view cp_prefix(std::string_view text, std::size_t n);

bool is_cjk(char32_t cp);
std::size_t count_cjk(std::string_view text);

bool is_space_cp(char32_t cp);

}  // namespace retsyn
