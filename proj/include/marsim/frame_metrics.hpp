#pragma once

#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace marsim {

inline constexpr double kMaxIntensity = 255.0;

// Row-major 8-bit grayscale frame.
struct Frame {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;

  std::size_t size() const { return pixels.size(); }
};

inline Frame make_frame(int width, int height, std::uint8_t fill = 0) {
  if (width <= 0 || height <= 0) {
    throw std::invalid_argument("frame dimensions must be positive");
  }
  Frame f;
  f.width = width;
  f.height = height;
  f.pixels.assign(static_cast<std::size_t>(width) * height, fill);
  return f;
}

namespace detail {
inline void check_same_shape(const Frame& a, const Frame& b) {
  if (a.width != b.width || a.height != b.height) {
    throw std::invalid_argument("frame dimension mismatch: " +
                                std::to_string(a.width) + "x" +
                                std::to_string(a.height) + " vs " +
                                std::to_string(b.width) + "x" +
                                std::to_string(b.height));
  }
  if (a.size() == 0) throw std::invalid_argument("empty frames");
}
}  // namespace detail

inline double mse(const Frame& a, const Frame& b) {
  detail::check_same_shape(a, b);
  double acc = 0.0;
  for (std::size_t i = 0; i < a.pixels.size(); ++i) {
    const double d =
        static_cast<double>(a.pixels[i]) - static_cast<double>(b.pixels[i]);
    acc += d * d;
  }
  return acc / static_cast<double>(a.pixels.size());
}

// Identical frames report the cap instead of an infinite ratio.
inline double psnr(const Frame& a, const Frame& b, double cap_db = 100.0) {
  const double m = mse(a, b);
  if (m <= 0.0) return cap_db;
  const double val = 20.0 * std::log10(kMaxIntensity / std::sqrt(m));
  return std::min(val, cap_db);
}

inline double mse_from_psnr(double psnr_db) {
  return kMaxIntensity * kMaxIntensity * std::pow(10.0, -psnr_db / 10.0);
}

inline double psnr_from_mse(double m, double cap_db = 100.0) {
  if (m <= 0.0) return cap_db;
  return std::min(20.0 * std::log10(kMaxIntensity / std::sqrt(m)), cap_db);
}

// Axis-aligned box given by center coordinates and extents.
struct BoundingBox {
  double x = 0.0;
  double y = 0.0;
  double w = 1.0;
  double h = 1.0;
};

inline double iou(const BoundingBox& g, const BoundingBox& p) {
  if (!(g.w > 0.0 && g.h > 0.0 && p.w > 0.0 && p.h > 0.0)) {
    throw std::invalid_argument("bounding boxes need positive extents");
  }
  const double ix = std::min(g.x + g.w / 2.0, p.x + p.w / 2.0) -
                    std::max(g.x - g.w / 2.0, p.x - p.w / 2.0);
  const double iy = std::min(g.y + g.h / 2.0, p.y + p.h / 2.0) -
                    std::max(g.y - g.h / 2.0, p.y - p.h / 2.0);
  if (ix <= 0.0 || iy <= 0.0) return 0.0;
  const double inter = ix * iy;
  const double uni = g.w * g.h + p.w * p.h - inter;
  return inter / uni;
}

// Zero-mean normalized cross-correlation; rejects constant frames.
inline double ncc(const Frame& a, const Frame& b) {
  detail::check_same_shape(a, b);
  const double n = static_cast<double>(a.pixels.size());
  double mean_a = 0.0;
  double mean_b = 0.0;
  for (std::size_t i = 0; i < a.pixels.size(); ++i) {
    mean_a += a.pixels[i];
    mean_b += b.pixels[i];
  }
  mean_a /= n;
  mean_b /= n;
  double dot = 0.0;
  double norm_a = 0.0;
  double norm_b = 0.0;
  for (std::size_t i = 0; i < a.pixels.size(); ++i) {
    const double da = a.pixels[i] - mean_a;
    const double db = b.pixels[i] - mean_b;
    dot += da * db;
    norm_a += da * da;
    norm_b += db * db;
  }
  if (norm_a <= 0.0 || norm_b <= 0.0) {
    throw std::domain_error("ncc undefined for constant frames");
  }
  return dot / std::sqrt(norm_a * norm_b);
}

// 8-bit PGM, binary (P5) or ASCII (P2).
inline Frame load_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open PGM file: " + path);

  auto next_token = [&in, &path]() {
    std::string tok;
    while (true) {
      int c = in.get();
      if (c == EOF) throw std::runtime_error("truncated PGM header: " + path);
      if (c == '#') {
        std::string skip;
        std::getline(in, skip);
        continue;
      }
      if (std::isspace(c)) {
        if (!tok.empty()) return tok;
        continue;
      }
      tok.push_back(static_cast<char>(c));
    }
  };

  const std::string magic = next_token();
  if (magic != "P5" && magic != "P2") {
    throw std::runtime_error("unsupported PGM magic '" + magic + "' in " + path);
  }
  const int width = std::stoi(next_token());
  const int height = std::stoi(next_token());
  const int maxval = std::stoi(next_token());
  if (width <= 0 || height <= 0) {
    throw std::runtime_error("bad PGM dimensions in " + path);
  }
  if (maxval <= 0 || maxval > 255) {
    throw std::runtime_error("only 8-bit PGM supported: " + path);
  }

  Frame f = make_frame(width, height);
  if (magic == "P5") {
    in.read(reinterpret_cast<char*>(f.pixels.data()),
            static_cast<std::streamsize>(f.pixels.size()));
    if (in.gcount() != static_cast<std::streamsize>(f.pixels.size())) {
      throw std::runtime_error("truncated PGM pixel data: " + path);
    }
  } else {
    for (auto& px : f.pixels) {
      int v;
      if (!(in >> v)) throw std::runtime_error("truncated PGM data: " + path);
      if (v < 0 || v > maxval) {
        throw std::runtime_error("PGM sample out of range: " + path);
      }
      px = static_cast<std::uint8_t>(v);
    }
  }
  return f;
}

inline void save_pgm(const Frame& f, const std::string& path) {
  if (f.width <= 0 || f.height <= 0 ||
      f.pixels.size() != static_cast<std::size_t>(f.width) * f.height) {
    throw std::invalid_argument("malformed frame");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write PGM file: " + path);
  out << "P5\n" << f.width << " " << f.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(f.pixels.data()),
            static_cast<std::streamsize>(f.pixels.size()));
  if (!out) throw std::runtime_error("short write on PGM file: " + path);
}

}  // namespace marsim
