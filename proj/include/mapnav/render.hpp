#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "mapnav/grid.hpp"

namespace mapnav {

struct Color {
  uint8_t r = 0, g = 0, b = 0;
  bool operator==(const Color&) const = default;
};

namespace palette {
inline constexpr Color wall{48, 48, 48};
inline constexpr Color free_space{255, 255, 255};
inline constexpr Color door{176, 148, 96};
inline constexpr Color door_open{146, 196, 125};
inline constexpr Color text{32, 32, 32};
inline constexpr Color center_mark{200, 30, 30};
inline constexpr Color decision_mark{40, 80, 200};
inline constexpr Color open_space_mark{30, 150, 60};
inline constexpr Color trajectory{40, 90, 220};
}  // namespace palette

struct Image {
  int width = 0;
  int height = 0;
  std::vector<uint8_t> rgb;  // row-major, top row first

  Image() = default;
  Image(int w, int h, Color fill = {255, 255, 255}) : width(w), height(h) {
    rgb.resize(static_cast<size_t>(w) * static_cast<size_t>(h) * 3);
    for (size_t i = 0; i < rgb.size(); i += 3) {
      rgb[i] = fill.r;
      rgb[i + 1] = fill.g;
      rgb[i + 2] = fill.b;
    }
  }

  void set(int x, int y, Color c) {
    if (x < 0 || y < 0 || x >= width || y >= height) return;
    size_t i = (static_cast<size_t>(y) * static_cast<size_t>(width) + static_cast<size_t>(x)) * 3;
    rgb[i] = c.r;
    rgb[i + 1] = c.g;
    rgb[i + 2] = c.b;
  }
  Color get(int x, int y) const {
    size_t i = (static_cast<size_t>(y) * static_cast<size_t>(width) + static_cast<size_t>(x)) * 3;
    return {rgb[i], rgb[i + 1], rgb[i + 2]};
  }
  void fill_rect(int x0, int y0, int x1, int y1, Color c) {
    for (int y = std::max(0, y0); y < std::min(height, y1); ++y) {
      for (int x = std::max(0, x0); x < std::min(width, x1); ++x) set(x, y, c);
    }
  }
};

namespace detail {

// Column-packed 5x7 glyphs, least significant bit on the top row.
inline const uint8_t* glyph5x7(char c) {
  static const struct {
    char ch;
    uint8_t col[5];
  } table[] = {
      {' ', {0x00, 0x00, 0x00, 0x00, 0x00}}, {'(', {0x00, 0x1C, 0x22, 0x41, 0x00}},
      {')', {0x00, 0x41, 0x22, 0x1C, 0x00}}, {'-', {0x08, 0x08, 0x08, 0x08, 0x08}},
      {'.', {0x00, 0x60, 0x60, 0x00, 0x00}}, {'_', {0x40, 0x40, 0x40, 0x40, 0x40}},
      {'0', {0x3E, 0x51, 0x49, 0x45, 0x3E}}, {'1', {0x00, 0x42, 0x7F, 0x40, 0x00}},
      {'2', {0x42, 0x61, 0x51, 0x49, 0x46}}, {'3', {0x21, 0x41, 0x45, 0x4B, 0x31}},
      {'4', {0x18, 0x14, 0x12, 0x7F, 0x10}}, {'5', {0x27, 0x45, 0x45, 0x45, 0x39}},
      {'6', {0x3C, 0x4A, 0x49, 0x49, 0x30}}, {'7', {0x01, 0x71, 0x09, 0x05, 0x03}},
      {'8', {0x36, 0x49, 0x49, 0x49, 0x36}}, {'9', {0x06, 0x49, 0x49, 0x29, 0x1E}},
      {'A', {0x7E, 0x11, 0x11, 0x11, 0x7E}}, {'B', {0x7F, 0x49, 0x49, 0x49, 0x36}},
      {'C', {0x3E, 0x41, 0x41, 0x41, 0x22}}, {'D', {0x7F, 0x41, 0x41, 0x22, 0x1C}},
      {'E', {0x7F, 0x49, 0x49, 0x49, 0x41}}, {'F', {0x7F, 0x09, 0x09, 0x09, 0x01}},
      {'G', {0x3E, 0x41, 0x49, 0x49, 0x7A}}, {'H', {0x7F, 0x08, 0x08, 0x08, 0x7F}},
      {'I', {0x00, 0x41, 0x7F, 0x41, 0x00}}, {'J', {0x20, 0x40, 0x41, 0x3F, 0x01}},
      {'K', {0x7F, 0x08, 0x14, 0x22, 0x41}}, {'L', {0x7F, 0x40, 0x40, 0x40, 0x40}},
      {'M', {0x7F, 0x02, 0x0C, 0x02, 0x7F}}, {'N', {0x7F, 0x04, 0x08, 0x10, 0x7F}},
      {'O', {0x3E, 0x41, 0x41, 0x41, 0x3E}}, {'P', {0x7F, 0x09, 0x09, 0x09, 0x06}},
      {'Q', {0x3E, 0x41, 0x51, 0x21, 0x5E}}, {'R', {0x7F, 0x09, 0x19, 0x29, 0x46}},
      {'S', {0x46, 0x49, 0x49, 0x49, 0x31}}, {'T', {0x01, 0x01, 0x7F, 0x01, 0x01}},
      {'U', {0x3F, 0x40, 0x40, 0x40, 0x3F}}, {'V', {0x1F, 0x20, 0x40, 0x20, 0x1F}},
      {'W', {0x3F, 0x40, 0x38, 0x40, 0x3F}}, {'X', {0x63, 0x14, 0x08, 0x14, 0x63}},
      {'Y', {0x07, 0x08, 0x70, 0x08, 0x07}}, {'Z', {0x61, 0x51, 0x49, 0x45, 0x43}},
  };
  static const uint8_t box[5] = {0x7F, 0x41, 0x41, 0x41, 0x7F};
  for (const auto& e : table) {
    if (e.ch == c) return e.col;
  }
  return box;
}

// Folds Latin-1 accented letters onto plain ASCII so labels like "Séjour"
// render with the small font.
inline char fold_codepoint(uint32_t cp) {
  if (cp < 0x80) {
    char c = static_cast<char>(cp);
    if (c >= 'a' && c <= 'z') return static_cast<char>(c - 'a' + 'A');
    return c;
  }
  static const char latin1[] = "AAAAAAACEEEEIIIIDNOOOOO.OUUUUY..AAAAAAACEEEEIIIIDNOOOOO.OUUUUY.Y";
  if (cp >= 0xC0 && cp <= 0xFF) return latin1[cp - 0xC0];
  return '\0';  // caller draws the fallback box
}

inline std::vector<char> fold_utf8(const std::string& text) {
  std::vector<char> out;
  for (size_t i = 0; i < text.size();) {
    unsigned char b = static_cast<unsigned char>(text[i]);
    uint32_t cp = 0;
    size_t len = 1;
    if (b < 0x80) {
      cp = b;
    } else if ((b >> 5) == 0x6 && i + 1 < text.size()) {
      cp = ((b & 0x1F) << 6) | (text[i + 1] & 0x3F);
      len = 2;
    } else if ((b >> 4) == 0xE && i + 2 < text.size()) {
      cp = ((b & 0x0F) << 12) | ((text[i + 1] & 0x3F) << 6) | (text[i + 2] & 0x3F);
      len = 3;
    } else {
      cp = 0xFFFD;
      len = (b >> 3) == 0x1E ? 4 : 1;
    }
    i += len;
    out.push_back(fold_codepoint(cp));
  }
  return out;
}

}  // namespace detail

inline void draw_text(Image& img, int x, int y, const std::string& text, Color c, int scale = 1) {
  int cx = x;
  for (char ch : detail::fold_utf8(text)) {
    const uint8_t* cols = detail::glyph5x7(ch ? ch : '\1');
    for (int col = 0; col < 5; ++col) {
      for (int row = 0; row < 7; ++row) {
        if (!(cols[col] >> row & 1)) continue;
        for (int sy = 0; sy < scale; ++sy) {
          for (int sx = 0; sx < scale; ++sx) {
            img.set(cx + col * scale + sx, y + row * scale + sy, c);
          }
        }
      }
    }
    cx += 6 * scale;
  }
}

inline int text_width(const std::string& text, int scale = 1) {
  return static_cast<int>(detail::fold_utf8(text).size()) * 6 * scale;
}

// ---- PNG output ----------------------------------------------------------

namespace detail {

inline uint32_t crc32(const uint8_t* data, size_t n, uint32_t crc = 0) {
  static const auto table = [] {
    std::array<uint32_t, 256> t{};
    for (uint32_t i = 0; i < 256; ++i) {
      uint32_t c = i;
      for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
      t[i] = c;
    }
    return t;
  }();
  crc ^= 0xFFFFFFFFu;
  for (size_t i = 0; i < n; ++i) crc = table[(crc ^ data[i]) & 0xFF] ^ (crc >> 8);
  return crc ^ 0xFFFFFFFFu;
}

inline uint32_t adler32(const uint8_t* data, size_t n) {
  uint32_t a = 1, b = 0;
  for (size_t i = 0; i < n; ++i) {
    a = (a + data[i]) % 65521;
    b = (b + a) % 65521;
  }
  return (b << 16) | a;
}

inline void put_u32(std::string& out, uint32_t v) {
  out.push_back(static_cast<char>(v >> 24));
  out.push_back(static_cast<char>(v >> 16));
  out.push_back(static_cast<char>(v >> 8));
  out.push_back(static_cast<char>(v));
}

inline void put_chunk(std::string& out, const char type[4], const std::string& data) {
  put_u32(out, static_cast<uint32_t>(data.size()));
  std::string body(type, 4);
  body += data;
  out += body;
  put_u32(out, crc32(reinterpret_cast<const uint8_t*>(body.data()), body.size()));
}

// Raw deflate "stored" blocks; no compression, but every decoder reads it.
inline std::string zlib_stored(const std::string& raw) {
  std::string z;
  z.push_back(0x78);
  z.push_back(0x01);
  size_t pos = 0;
  do {
    size_t len = std::min<size_t>(65535, raw.size() - pos);
    bool final = pos + len == raw.size();
    z.push_back(final ? 1 : 0);
    z.push_back(static_cast<char>(len & 0xFF));
    z.push_back(static_cast<char>(len >> 8));
    z.push_back(static_cast<char>(~len & 0xFF));
    z.push_back(static_cast<char>((~len >> 8) & 0xFF));
    z.append(raw, pos, len);
    pos += len;
  } while (pos < raw.size());
  put_u32(z, adler32(reinterpret_cast<const uint8_t*>(raw.data()), raw.size()));
  return z;
}

}  // namespace detail

inline std::string png_bytes(const Image& img) {
  std::string out("\x89PNG\r\n\x1a\n", 8);
  std::string ihdr;
  detail::put_u32(ihdr, static_cast<uint32_t>(img.width));
  detail::put_u32(ihdr, static_cast<uint32_t>(img.height));
  ihdr.push_back(8);   // bit depth
  ihdr.push_back(2);   // truecolor
  ihdr.push_back(0);   // deflate
  ihdr.push_back(0);   // default filtering
  ihdr.push_back(0);   // no interlace
  detail::put_chunk(out, "IHDR", ihdr);

  std::string raw;
  raw.reserve(static_cast<size_t>(img.height) * (static_cast<size_t>(img.width) * 3 + 1));
  for (int y = 0; y < img.height; ++y) {
    raw.push_back(0);  // filter: none
    raw.append(reinterpret_cast<const char*>(img.rgb.data()) +
                   static_cast<size_t>(y) * static_cast<size_t>(img.width) * 3,
               static_cast<size_t>(img.width) * 3);
  }
  detail::put_chunk(out, "IDAT", detail::zlib_stored(raw));
  detail::put_chunk(out, "IEND", "");
  return out;
}

inline void write_png(const Image& img, const std::string& path) {
  write_file(path, png_bytes(img));
}

// ---- Map pictures --------------------------------------------------------

struct RenderOptions {
  double scale = 16.0;  // pixels per world unit
  bool draw_room_names = true;
  bool draw_door_ids = true;
  bool draw_labels = true;
};

// Top-down picture of the plan: dark walls, white rooms, tinted doorways,
// optional label markers and names.
inline Image render_floorplan(const FloorPlan& fp, const RenderOptions& opts = {}) {
  const double t = fp.wall_thickness;
  const double s = opts.scale;
  const double ox = fp.bounds.x - t;
  const double oy = fp.bounds.y - t;
  int w = static_cast<int>(std::lround((fp.bounds.w + 2 * t) * s));
  int h = static_cast<int>(std::lround((fp.bounds.h + 2 * t) * s));
  Image img(w, h, palette::wall);

  auto px = [&](double wx) { return static_cast<int>(std::lround((wx - ox) * s)); };
  auto py = [&](double wy) { return h - static_cast<int>(std::lround((wy - oy) * s)); };

  for (const Room& room : fp.rooms) {
    for (const Rect& rc : room.rects) {
      img.fill_rect(px(rc.x), py(rc.y1()), px(rc.x1()), py(rc.y), palette::free_space);
    }
  }

  for (const Door& d : fp.doors) {
    Rect band = d.segment.extruded(t);
    Color c = d.open_by_default ? palette::door_open : palette::door;
    int x0 = px(band.x), x1 = px(band.x1());
    int y0 = py(band.y1()), y1 = py(band.y);
    for (int y = std::max(0, y0); y < std::min(h, y1); ++y) {
      for (int x = std::max(0, x0); x < std::min(w, x1); ++x) {
        if (img.get(x, y) == palette::wall) img.set(x, y, c);
      }
    }
    if (opts.draw_door_ids) {
      Point m = d.segment.midpoint();
      draw_text(img, px(m.x) - text_width(d.id) / 2, py(m.y) - 3, d.id, palette::text);
    }
  }

  if (opts.draw_labels) {
    for (const Label& lb : fp.labels) {
      Color c = lb.kind == LabelKind::Center         ? palette::center_mark
                : lb.kind == LabelKind::DecisionPoint ? palette::decision_mark
                                                      : palette::open_space_mark;
      int cx = px(lb.anchor.x), cy = py(lb.anchor.y);
      int r = std::max(2, static_cast<int>(s / 8));
      img.fill_rect(cx - r, cy - r, cx + r, cy + r, c);
    }
  }

  if (opts.draw_room_names) {
    for (const Room& room : fp.rooms) {
      Point a = room.anchor();
      const std::string& name = room.name.empty() ? room.id : room.name;
      draw_text(img, px(a.x) - text_width(name) / 2, py(a.y) + 4, name, palette::text);
    }
  }
  return img;
}

// Cell-per-cell picture of a raster, with an optional driven path overlay.
inline Image render_grid(const OccupancyGrid& g, int cell_px = 8,
                         const std::vector<std::pair<int, int>>& trajectory = {}) {
  Image img(g.width * cell_px, g.height * cell_px, palette::wall);
  for (int row = 0; row < g.height; ++row) {
    int y0 = (g.height - 1 - row) * cell_px;
    for (int col = 0; col < g.width; ++col) {
      Color c = palette::wall;
      if (g.at(row, col) == CellType::Free) c = palette::free_space;
      if (g.at(row, col) == CellType::Door) c = palette::door;
      img.fill_rect(col * cell_px, y0, (col + 1) * cell_px, y0 + cell_px, c);
    }
  }
  for (auto [row, col] : trajectory) {
    int y0 = (g.height - 1 - row) * cell_px;
    int inset = std::max(1, cell_px / 4);
    img.fill_rect(col * cell_px + inset, y0 + inset, (col + 1) * cell_px - inset,
                  y0 + cell_px - inset, palette::trajectory);
  }
  return img;
}

}  // namespace mapnav
