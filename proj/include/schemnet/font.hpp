#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "schemnet/raster.hpp"

namespace schemnet::font {

inline constexpr int kGlyphW = 5;
inline constexpr int kGlyphH = 7;
inline constexpr int kSpacing = 1;  // blank columns between glyphs of one word

struct Glyph {
  char32_t code;
  std::array<std::uint8_t, kGlyphH> rows;  // bit 4 = leftmost column
  bool ink(int col, int row) const { return (rows[row] >> (kGlyphW - 1 - col)) & 1; }
};

std::span<const Glyph> glyphs();
const Glyph* find(char32_t code);

std::u32string decode_utf8(std::string_view s);
std::string encode_utf8(std::u32string_view s);

// Pixel width of a single word at `scale`.
int word_width(std::u32string_view text, int scale);
// Draws a word with its top-left glyph cell at (x, y). Returns the covered cell box.
BBox draw_word(BinaryImage& img, int x, int y, std::u32string_view text, int scale);

}  // namespace schemnet::font
