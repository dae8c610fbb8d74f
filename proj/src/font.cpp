#include "schemnet/font.hpp"

namespace schemnet::font {

namespace {

constexpr Glyph kGlyphs[] = {
    {U'\x0041', {0x0e, 0x11, 0x11, 0x1f, 0x11, 0x11, 0x11}},  // A
    {U'\x0042', {0x1e, 0x11, 0x11, 0x1e, 0x11, 0x11, 0x1e}},  // B
    {U'\x0043', {0x0e, 0x11, 0x10, 0x10, 0x10, 0x11, 0x0e}},  // C
    {U'\x0044', {0x1c, 0x12, 0x11, 0x11, 0x11, 0x12, 0x1c}},  // D
    {U'\x0045', {0x1f, 0x10, 0x10, 0x1e, 0x10, 0x10, 0x1f}},  // E
    {U'\x0046', {0x1f, 0x10, 0x10, 0x1e, 0x10, 0x10, 0x10}},  // F
    {U'\x0047', {0x0e, 0x11, 0x10, 0x17, 0x11, 0x11, 0x0f}},  // G
    {U'\x0048', {0x11, 0x11, 0x11, 0x1f, 0x11, 0x11, 0x11}},  // H
    {U'\x0049', {0x0e, 0x04, 0x04, 0x04, 0x04, 0x04, 0x0e}},  // I
    {U'\x004a', {0x07, 0x02, 0x02, 0x02, 0x02, 0x12, 0x0c}},  // J
    {U'\x004b', {0x11, 0x12, 0x14, 0x18, 0x14, 0x12, 0x11}},  // K
    {U'\x004c', {0x10, 0x10, 0x10, 0x10, 0x10, 0x10, 0x1f}},  // L
    {U'\x004d', {0x11, 0x1b, 0x15, 0x15, 0x11, 0x11, 0x11}},  // M
    {U'\x004e', {0x11, 0x11, 0x19, 0x15, 0x13, 0x11, 0x11}},  // N
    {U'\x004f', {0x0e, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0e}},  // O
    {U'\x0050', {0x1e, 0x11, 0x11, 0x1e, 0x10, 0x10, 0x10}},  // P
    {U'\x0051', {0x0e, 0x11, 0x11, 0x11, 0x15, 0x12, 0x0d}},  // Q
    {U'\x0052', {0x1e, 0x11, 0x11, 0x1e, 0x14, 0x12, 0x11}},  // R
    {U'\x0053', {0x0f, 0x10, 0x10, 0x0e, 0x01, 0x01, 0x1e}},  // S
    {U'\x0054', {0x1f, 0x04, 0x04, 0x04, 0x04, 0x04, 0x04}},  // T
    {U'\x0055', {0x11, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0e}},  // U
    {U'\x0056', {0x11, 0x11, 0x11, 0x11, 0x11, 0x0a, 0x04}},  // V
    {U'\x0057', {0x11, 0x11, 0x11, 0x15, 0x15, 0x15, 0x0a}},  // W
    {U'\x0058', {0x11, 0x11, 0x0a, 0x04, 0x0a, 0x11, 0x11}},  // X
    {U'\x0059', {0x11, 0x11, 0x11, 0x0a, 0x04, 0x04, 0x04}},  // Y
    {U'\x005a', {0x1f, 0x01, 0x02, 0x04, 0x08, 0x10, 0x1f}},  // Z
    {U'\x0061', {0x00, 0x00, 0x0e, 0x01, 0x0f, 0x11, 0x0f}},  // a
    {U'\x0062', {0x10, 0x10, 0x16, 0x19, 0x11, 0x11, 0x1e}},  // b
    {U'\x0063', {0x00, 0x00, 0x0e, 0x10, 0x10, 0x11, 0x0e}},  // c
    {U'\x0064', {0x01, 0x01, 0x0d, 0x13, 0x11, 0x11, 0x0f}},  // d
    {U'\x0065', {0x00, 0x00, 0x0e, 0x11, 0x1f, 0x10, 0x0e}},  // e
    {U'\x0066', {0x06, 0x09, 0x08, 0x1c, 0x08, 0x08, 0x08}},  // f
    {U'\x0067', {0x00, 0x0f, 0x11, 0x11, 0x0f, 0x01, 0x0e}},  // g
    {U'\x0068', {0x10, 0x10, 0x16, 0x19, 0x11, 0x11, 0x11}},  // h
    {U'\x0069', {0x04, 0x00, 0x0c, 0x04, 0x04, 0x04, 0x0e}},  // i
    {U'\x006a', {0x02, 0x00, 0x06, 0x02, 0x02, 0x12, 0x0c}},  // j
    {U'\x006b', {0x10, 0x10, 0x12, 0x14, 0x18, 0x14, 0x12}},  // k
    {U'\x006c', {0x0c, 0x04, 0x04, 0x04, 0x04, 0x04, 0x0e}},  // l
    {U'\x006d', {0x00, 0x00, 0x1a, 0x15, 0x15, 0x11, 0x11}},  // m
    {U'\x006e', {0x00, 0x00, 0x16, 0x19, 0x11, 0x11, 0x11}},  // n
    {U'\x006f', {0x00, 0x00, 0x0e, 0x11, 0x11, 0x11, 0x0e}},  // o
    {U'\x0070', {0x00, 0x1e, 0x11, 0x11, 0x1e, 0x10, 0x10}},  // p
    {U'\x0071', {0x00, 0x0f, 0x11, 0x11, 0x0f, 0x01, 0x01}},  // q
    {U'\x0072', {0x00, 0x00, 0x16, 0x19, 0x10, 0x10, 0x10}},  // r
    {U'\x0073', {0x00, 0x00, 0x0e, 0x10, 0x0e, 0x01, 0x1e}},  // s
    {U'\x0074', {0x08, 0x08, 0x1c, 0x08, 0x08, 0x09, 0x06}},  // t
    {U'\x0075', {0x00, 0x00, 0x11, 0x11, 0x11, 0x13, 0x0d}},  // u
    {U'\x0076', {0x00, 0x00, 0x11, 0x11, 0x11, 0x0a, 0x04}},  // v
    {U'\x0077', {0x00, 0x00, 0x11, 0x11, 0x15, 0x15, 0x0a}},  // w
    {U'\x0078', {0x00, 0x00, 0x11, 0x0a, 0x04, 0x0a, 0x11}},  // x
    {U'\x0079', {0x00, 0x11, 0x11, 0x11, 0x0f, 0x01, 0x0e}},  // y
    {U'\x007a', {0x00, 0x00, 0x1f, 0x02, 0x04, 0x08, 0x1f}},  // z
    {U'\x0030', {0x0e, 0x11, 0x13, 0x15, 0x19, 0x11, 0x0e}},  // 0
    {U'\x0031', {0x04, 0x0c, 0x04, 0x04, 0x04, 0x04, 0x0e}},  // 1
    {U'\x0032', {0x0e, 0x11, 0x01, 0x02, 0x04, 0x08, 0x1f}},  // 2
    {U'\x0033', {0x1f, 0x02, 0x04, 0x02, 0x01, 0x11, 0x0e}},  // 3
    {U'\x0034', {0x02, 0x06, 0x0a, 0x12, 0x1f, 0x02, 0x02}},  // 4
    {U'\x0035', {0x1f, 0x10, 0x1e, 0x01, 0x01, 0x11, 0x0e}},  // 5
    {U'\x0036', {0x06, 0x08, 0x10, 0x1e, 0x11, 0x11, 0x0e}},  // 6
    {U'\x0037', {0x1f, 0x01, 0x02, 0x04, 0x08, 0x08, 0x08}},  // 7
    {U'\x0038', {0x0e, 0x11, 0x11, 0x0e, 0x11, 0x11, 0x0e}},  // 8
    {U'\x0039', {0x0e, 0x11, 0x11, 0x0f, 0x01, 0x02, 0x0c}},  // 9
    {U'\x002e', {0x00, 0x00, 0x00, 0x00, 0x00, 0x0c, 0x0c}},  // .
    {U'\x00b5', {0x00, 0x11, 0x11, 0x11, 0x13, 0x1d, 0x10}},  // µ
    {U'\x03a9', {0x0e, 0x11, 0x11, 0x11, 0x0a, 0x0a, 0x1b}},  // Ω
};

}  // namespace

std::span<const Glyph> glyphs() { return kGlyphs; }

const Glyph* find(char32_t code) {
  for (const auto& g : kGlyphs)
    if (g.code == code) return &g;
  return nullptr;
}

std::u32string decode_utf8(std::string_view s) {
  std::u32string out;
  for (std::size_t i = 0; i < s.size();) {
    unsigned char c = static_cast<unsigned char>(s[i]);
    char32_t cp;
    int extra;
    if (c < 0x80) { cp = c; extra = 0; }
    else if ((c >> 5) == 0x6) { cp = c & 0x1f; extra = 1; }
    else if ((c >> 4) == 0xe) { cp = c & 0x0f; extra = 2; }
    else if ((c >> 3) == 0x1e) { cp = c & 0x07; extra = 3; }
    else { out.push_back(U'\ufffd'); ++i; continue; }
    if (i + static_cast<std::size_t>(extra) >= s.size() && extra > 0) {
      out.push_back(U'\ufffd');
      break;
    }
    for (int k = 1; k <= extra; ++k) cp = (cp << 6) | (static_cast<unsigned char>(s[i + k]) & 0x3f);
    out.push_back(cp);
    i += static_cast<std::size_t>(extra) + 1;
  }
  return out;
}

std::string encode_utf8(std::u32string_view s) {
  std::string out;
  for (char32_t cp : s) {
    if (cp < 0x80) {
      out += static_cast<char>(cp);
    } else if (cp < 0x800) {
      out += static_cast<char>(0xc0 | (cp >> 6));
      out += static_cast<char>(0x80 | (cp & 0x3f));
    } else if (cp < 0x10000) {
      out += static_cast<char>(0xe0 | (cp >> 12));
      out += static_cast<char>(0x80 | ((cp >> 6) & 0x3f));
      out += static_cast<char>(0x80 | (cp & 0x3f));
    } else {
      out += static_cast<char>(0xf0 | (cp >> 18));
      out += static_cast<char>(0x80 | ((cp >> 12) & 0x3f));
      out += static_cast<char>(0x80 | ((cp >> 6) & 0x3f));
      out += static_cast<char>(0x80 | (cp & 0x3f));
    }
  }
  return out;
}

int word_width(std::u32string_view text, int scale) {
  if (text.empty()) return 0;
  int n = static_cast<int>(text.size());
  return (n * kGlyphW + (n - 1) * kSpacing) * scale;
}

BBox draw_word(BinaryImage& img, int x, int y, std::u32string_view text, int scale) {
  int cx = x;
  for (char32_t cp : text) {
    const Glyph* g = find(cp);
    if (g) {
      for (int r = 0; r < kGlyphH; ++r)
        for (int c = 0; c < kGlyphW; ++c)
          if (g->ink(c, r))
            for (int dy = 0; dy < scale; ++dy)
              for (int dx = 0; dx < scale; ++dx) {
                int px = cx + c * scale + dx, py = y + r * scale + dy;
                if (img.in_bounds(px, py)) img.set(px, py);
              }
    }
    cx += (kGlyphW + kSpacing) * scale;
  }
  return {x, y, word_width(text, scale), kGlyphH * scale};
}

}  // namespace schemnet::font
