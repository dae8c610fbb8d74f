#include "schemnet/raster.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <numeric>

namespace schemnet {

GrayImage decode_png(std::span<const std::uint8_t> bytes);  // png_io.cpp

namespace {

constexpr std::uint8_t kPngSig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};

class PgmReader {
 public:
  explicit PgmReader(std::span<const std::uint8_t> b) : bytes_(b) {}

  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  int read_int(const char* field) {
    skip_space_and_comments();
    if (pos_ >= bytes_.size()) throw DecodeError(std::string("PGM truncated reading ") + field, pos_);
    if (!std::isdigit(bytes_[pos_])) throw DecodeError(std::string("PGM expected integer for ") + field, pos_);
    long v = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      v = v * 10 + (bytes_[pos_] - '0');
      if (v > (1 << 24)) throw DecodeError(std::string("PGM value too large for ") + field, pos_);
      ++pos_;
    }
    return static_cast<int>(v);
  }

  std::size_t pos_ = 2;
  std::span<const std::uint8_t> bytes_;
};

GrayImage decode_pgm(std::span<const std::uint8_t> bytes) {
  PgmReader r(bytes);
  int w = r.read_int("width");
  int h = r.read_int("height");
  int maxval = r.read_int("maxval");
  if (w < 1 || h < 1) throw DecodeError("PGM dimensions must be positive", r.pos_);
  if (maxval != 255) throw DecodeError("PGM maxval must be 255", r.pos_);
  if (r.pos_ >= bytes.size() || !std::isspace(bytes[r.pos_]))
    throw DecodeError("PGM missing whitespace after header", r.pos_);
  ++r.pos_;
  std::size_t need = static_cast<std::size_t>(w) * h;
  if (bytes.size() - r.pos_ < need) throw DecodeError("PGM truncated payload", bytes.size());
  GrayImage img(w, h);
  std::copy_n(bytes.begin() + static_cast<std::ptrdiff_t>(r.pos_), need, img.data.begin());
  return img;
}

}  // namespace

std::size_t BinaryImage::popcount() const {
  return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), std::uint8_t{1}));
}

GrayImage load_image(std::span<const std::uint8_t> bytes) {
  if (bytes.empty()) throw DecodeError("empty image stream", 0);
  if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '5') return decode_pgm(bytes);
  if (bytes.size() >= 8 && std::equal(std::begin(kPngSig), std::end(kPngSig), bytes.begin()))
    return decode_png(bytes);
  throw DecodeError("unrecognized image signature", 0);
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

GrayImage load_image_file(const std::filesystem::path& path) {
  auto bytes = read_file(path);
  return load_image(bytes);
}

std::vector<std::uint8_t> encode_pgm(const GrayImage& img) {
  std::string header = "P5\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), img.data.begin(), img.data.end());
  return out;
}

int otsu_threshold(std::span<const std::uint64_t, 256> hist) {
  double total = 0, sum_all = 0;
  for (int i = 0; i < 256; ++i) {
    total += static_cast<double>(hist[i]);
    sum_all += static_cast<double>(i) * static_cast<double>(hist[i]);
  }
  if (total == 0) return 0;
  double w0 = 0, sum0 = 0, best = -1;
  int best_t = 0;
  // Class 0 = [0, t), class 1 = [t, 255].
  for (int t = 1; t < 256; ++t) {
    w0 += static_cast<double>(hist[t - 1]);
    sum0 += static_cast<double>(t - 1) * static_cast<double>(hist[t - 1]);
    double w1 = total - w0;
    if (w0 == 0 || w1 == 0) continue;
    double m0 = sum0 / w0, m1 = (sum_all - sum0) / w1;
    double between = w0 * w1 * (m0 - m1) * (m0 - m1);
    if (between > best * (1 + 1e-12) + 1e-12) {
      best = between;
      best_t = t;
    }
  }
  return best_t;
}

BinaryImage binarize(const GrayImage& img) {
  std::array<std::uint64_t, 256> hist{};
  std::uint64_t sum = 0;
  for (auto v : img.data) {
    ++hist[v];
    sum += v;
  }
  BinaryImage out(img.width, img.height);
  int t = otsu_threshold(hist);
  if (t == 0) return out;  // constant image
  bool dark_ink = sum >= 128ull * img.data.size();
  for (std::size_t i = 0; i < img.data.size(); ++i) {
    bool below = img.data[i] < t;
    out.bits[i] = (dark_ink ? below : !below) ? 1 : 0;
  }
  return out;
}

namespace {

// Separable square max/min filter on a byte mask. Out-of-bounds is `outside`.
std::vector<std::uint8_t> square_filter(const std::vector<std::uint8_t>& in, int w, int h, int r, bool take_max,
                                        std::uint8_t outside) {
  std::vector<std::uint8_t> tmp(in.size()), out(in.size());
  auto run = [&](const std::vector<std::uint8_t>& src, std::vector<std::uint8_t>& dst, bool horizontal) {
    int lines = horizontal ? h : w;
    int len = horizontal ? w : h;
    for (int l = 0; l < lines; ++l) {
      auto idx = [&](int i) { return horizontal ? static_cast<std::size_t>(l) * w + i : static_cast<std::size_t>(i) * w + l; };
      // Running count of set pixels in the window.
      int count = 0;
      for (int i = -r; i <= r; ++i) count += (i < 0 || i >= len) ? outside : src[idx(i)];
      for (int i = 0; i < len; ++i) {
        int win = 2 * r + 1;
        dst[idx(i)] = take_max ? (count > 0) : (count == win);
        int out_i = i - r, in_i = i + r + 1;
        count -= (out_i < 0 || out_i >= len) ? outside : src[idx(out_i)];
        count += (in_i < 0 || in_i >= len) ? outside : src[idx(in_i)];
      }
    }
  };
  run(in, tmp, true);
  run(tmp, out, false);
  return out;
}

}  // namespace

BinaryImage dilate(const BinaryImage& img, int radius) {
  if (radius <= 0) return img;
  BinaryImage out(img.width, img.height);
  out.bits = square_filter(img.bits, img.width, img.height, radius, true, 0);
  return out;
}

BinaryImage close_gaps(const BinaryImage& img, int radius) {
  if (radius <= 0) return img;
  // Work in a frame padded by `radius` so the result equals closing on the unbounded plane.
  int pw = img.width + 2 * radius, ph = img.height + 2 * radius;
  std::vector<std::uint8_t> padded(static_cast<std::size_t>(pw) * ph, 0);
  for (int y = 0; y < img.height; ++y)
    std::copy_n(img.bits.begin() + static_cast<std::ptrdiff_t>(y) * img.width, img.width,
                padded.begin() + static_cast<std::ptrdiff_t>(y + radius) * pw + radius);
  auto dil = square_filter(padded, pw, ph, radius, true, 0);
  auto ero = square_filter(dil, pw, ph, radius, false, 0);
  BinaryImage out(img.width, img.height);
  for (int y = 0; y < img.height; ++y)
    std::copy_n(ero.begin() + static_cast<std::ptrdiff_t>(y + radius) * pw + radius, img.width,
                out.bits.begin() + static_cast<std::ptrdiff_t>(y) * img.width);
  return out;
}

namespace {

struct UnionFind {
  std::vector<std::int32_t> parent;
  std::int32_t make() {
    parent.push_back(static_cast<std::int32_t>(parent.size()));
    return parent.back();
  }
  std::int32_t find(std::int32_t a) {
    while (parent[a] != a) {
      parent[a] = parent[parent[a]];
      a = parent[a];
    }
    return a;
  }
  void unite(std::int32_t a, std::int32_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (a < b) parent[b] = a;
    else parent[a] = b;
  }
};

}  // namespace

LabelMap label_components(const BinaryImage& img, Connectivity conn) {
  const int w = img.width, h = img.height;
  LabelMap lm;
  lm.width = w;
  lm.height = h;
  lm.labels.assign(static_cast<std::size_t>(w) * h, 0);
  UnionFind uf;
  uf.make();  // slot 0 = background
  const bool eight = conn == Connectivity::Eight;

  // First pass: provisional labels from already-visited neighbours.
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!img.get(x, y)) continue;
      std::int32_t nb[4];
      int n = 0;
      auto look = [&](int nx, int ny) {
        if (nx < 0 || ny < 0 || nx >= w) return;
        std::int32_t l = lm.labels[static_cast<std::size_t>(ny) * w + nx];
        if (l) nb[n++] = l;
      };
      look(x - 1, y);
      look(x, y - 1);
      if (eight) {
        look(x - 1, y - 1);
        look(x + 1, y - 1);
      }
      std::int32_t label;
      if (n == 0) {
        label = uf.make();
      } else {
        label = nb[0];
        for (int i = 1; i < n; ++i) uf.unite(label, nb[i]);
      }
      lm.labels[static_cast<std::size_t>(y) * w + x] = label;
    }
  }

  // Second pass: resolve equivalences, renumber in first-encounter order.
  std::vector<std::int32_t> remap(uf.parent.size(), 0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      auto& l = lm.labels[static_cast<std::size_t>(y) * w + x];
      if (!l) continue;
      std::int32_t root = uf.find(l);
      if (!remap[root]) {
        remap[root] = ++lm.region_count;
        lm.regions.push_back({0, {x, y, 1, 1}, {x, y}});
      }
      l = remap[root];
      auto& st = lm.regions[static_cast<std::size_t>(l) - 1];
      ++st.area;
      int x0 = std::min(st.bbox.x, x), y0 = std::min(st.bbox.y, y);
      int x1 = std::max(st.bbox.right(), x + 1), y1 = std::max(st.bbox.bottom(), y + 1);
      st.bbox = {x0, y0, x1 - x0, y1 - y0};
    }
  }
  return lm;
}

GrayImage to_gray(const BinaryImage& img) {
  GrayImage g(img.width, img.height);
  for (std::size_t i = 0; i < img.bits.size(); ++i) g.data[i] = img.bits[i] ? 0 : 255;
  return g;
}

GrayImage colorize_labels(const LabelMap& lm) {
  GrayImage g(lm.width, lm.height);
  for (std::size_t i = 0; i < lm.labels.size(); ++i) {
    if (lm.labels[i]) g.data[i] = static_cast<std::uint8_t>(16 + (lm.labels[i] * 37) % 192);
  }
  return g;
}

BinaryImage flip_horizontal(const BinaryImage& img) {
  BinaryImage out(img.width, img.height);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) out.set(img.width - 1 - x, y, img.get(x, y));
  return out;
}

GrayImage flip_horizontal(const GrayImage& img) {
  GrayImage out(img.width, img.height);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) out.at(img.width - 1 - x, y) = img.at(x, y);
  return out;
}

GrayImage upscale(const GrayImage& img, int factor) {
  if (factor <= 1) return img;
  GrayImage out(img.width * factor, img.height * factor);
  for (int y = 0; y < out.height; ++y)
    for (int x = 0; x < out.width; ++x) out.at(x, y) = img.at(x / factor, y / factor);
  return out;
}

int detect_block_scale(const BinaryImage& img, int max_factor) {
  for (int k = max_factor; k >= 2; --k) {
    if (img.width % k || img.height % k) continue;
    bool ok = true;
    for (int y = 0; y < img.height && ok; ++y) {
      int by = y - y % k;
      for (int x = 0; x < img.width; ++x) {
        if (img.get(x, y) != img.get(x - x % k, by)) {
          ok = false;
          break;
        }
      }
    }
    if (ok && img.popcount() > 0) return k;
  }
  return 1;
}

BinaryImage downscale(const BinaryImage& img, int factor) {
  if (factor <= 1) return img;
  BinaryImage out(img.width / factor, img.height / factor);
  for (int y = 0; y < out.height; ++y)
    for (int x = 0; x < out.width; ++x) out.set(x, y, img.get(x * factor, y * factor));
  return out;
}

}  // namespace schemnet
