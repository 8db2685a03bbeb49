#pragma once

// Frame descriptors: keyframe sampling, HSV colour histograms, LBP texture
// histograms and the FVDS binary container for externally computed features.

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fivr/core.hpp"

namespace fivr::features {

struct FrameImage {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::vector<std::uint8_t> pixels;  // row-major RGB

  FrameImage() = default;
  FrameImage(std::uint32_t w, std::uint32_t h, std::vector<std::uint8_t> rgb)
      : width(w), height(h), pixels(std::move(rgb)) {
    if (w == 0 || h == 0) throw std::invalid_argument("FrameImage: empty dimensions");
    if (pixels.size() != 3ull * w * h) throw std::invalid_argument("FrameImage: pixel buffer size mismatch");
  }
  FrameImage(std::uint32_t w, std::uint32_t h, std::uint8_t r, std::uint8_t g, std::uint8_t b)
      : width(w), height(h), pixels(3ull * w * h) {
    if (w == 0 || h == 0) throw std::invalid_argument("FrameImage: empty dimensions");
    for (std::size_t i = 0; i < pixels.size(); i += 3) {
      pixels[i] = r;
      pixels[i + 1] = g;
      pixels[i + 2] = b;
    }
  }

  const std::uint8_t* at(std::uint32_t x, std::uint32_t y) const { return &pixels[3ull * (std::size_t(y) * width + x)]; }
  std::uint8_t* at(std::uint32_t x, std::uint32_t y) { return &pixels[3ull * (std::size_t(y) * width + x)]; }
};

// One named stream of fixed-dimension vectors, stored contiguously.
struct Channel {
  std::string name;
  std::uint32_t dim = 0;
  std::vector<float> data;

  std::size_t count() const noexcept { return dim == 0 ? 0 : data.size() / dim; }
  std::span<const float> frame(std::size_t i) const { return {data.data() + i * dim, dim}; }

  void push(std::span<const float> v) {
    if (v.size() != dim) throw std::invalid_argument("channel '" + name + "': vector dimension mismatch");
    data.insert(data.end(), v.begin(), v.end());
  }

  bool operator==(const Channel&) const = default;
};

struct DescriptorSequence {
  VideoId video_id;
  std::vector<Channel> channels;

  const Channel* find(std::string_view name) const {
    for (const auto& c : channels)
      if (c.name == name) return &c;
    return nullptr;
  }
  const Channel& channel(std::string_view name) const {
    if (auto* c = find(name)) return *c;
    throw std::invalid_argument("video '" + video_id + "' has no channel '" + std::string(name) + "'");
  }
  std::size_t frame_count() const { return channels.empty() ? 0 : channels.front().count(); }

  bool operator==(const DescriptorSequence&) const = default;
};

// Index of the first frame at or after each whole second: ceil(s * fps) for
// s = 0, 1, ... while it stays inside the stream.
inline std::vector<std::size_t> keyframe_indices(std::size_t frame_count, double fps) {
  if (frame_count == 0) throw std::invalid_argument("keyframe sampling: empty frame stream");
  if (!(fps > 0.0) || !std::isfinite(fps)) throw std::invalid_argument("keyframe sampling: fps must be positive");
  std::vector<std::size_t> out;
  for (std::size_t s = 0;; ++s) {
    const double pos = std::ceil(static_cast<double>(s) * fps - 1e-9);
    if (pos >= static_cast<double>(frame_count)) break;
    out.push_back(static_cast<std::size_t>(pos));
  }
  return out;
}

template <typename Frame>
std::vector<Frame> sample_keyframes(std::span<const Frame> frames, double fps) {
  std::vector<Frame> out;
  for (auto i : keyframe_indices(frames.size(), fps)) out.push_back(frames[i]);
  return out;
}

struct HsvBinning {
  std::uint32_t hue = 8;
  std::uint32_t saturation = 8;
  std::uint32_t value = 8;
  std::uint32_t size() const { return hue * saturation * value; }
};

// Bin of one RGB pixel. Hue sectors are computed in exact integer arithmetic
// on the 0..360 scale; achromatic pixels (max == min) take hue 0.
inline std::uint32_t hsv_bin(std::uint8_t r, std::uint8_t g, std::uint8_t b, const HsvBinning& bins = {}) {
  const int mx = std::max({r, g, b});
  const int mn = std::min({r, g, b});
  const int delta = mx - mn;
  long hue_num = 0;  // hue / 60deg * delta, in [0, 6 * delta)
  if (delta > 0) {
    if (mx == r)
      hue_num = ((static_cast<long>(g) - b) + 6L * delta) % (6L * delta);
    else if (mx == g)
      hue_num = (static_cast<long>(b) - r) + 2L * delta;
    else
      hue_num = (static_cast<long>(r) - g) + 4L * delta;
  }
  const std::uint32_t h = delta > 0 ? static_cast<std::uint32_t>(hue_num * bins.hue / (6L * delta)) : 0;
  const std::uint32_t s = mx > 0 ? std::min<std::uint32_t>(bins.saturation - 1, delta * bins.saturation / mx) : 0;
  const std::uint32_t v = std::min<std::uint32_t>(bins.value - 1, mx * bins.value / 256);
  return (std::min(h, bins.hue - 1) * bins.saturation + s) * bins.value + v;
}

inline std::vector<float> extract_hsv_histogram(const FrameImage& frame, const HsvBinning& bins = {}) {
  std::vector<double> counts(bins.size(), 0.0);
  const std::size_t n = std::size_t(frame.width) * frame.height;
  for (std::size_t i = 0; i < n; ++i) {
    const auto* p = &frame.pixels[3 * i];
    counts[hsv_bin(p[0], p[1], p[2], bins)] += 1.0;
  }
  std::vector<float> out(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) out[i] = static_cast<float>(counts[i] / static_cast<double>(n));
  return out;
}

// Integer luma, 0.299R + 0.587G + 0.114B rounded half up.
inline std::uint8_t luma(const std::uint8_t* rgb) {
  return static_cast<std::uint8_t>((299u * rgb[0] + 587u * rgb[1] + 114u * rgb[2] + 500u) / 1000u);
}

// Neighbour offsets in bit order, clockwise from the top-left.
inline constexpr std::array<std::array<int, 2>, 8> kLbpNeighbours{
    {{-1, -1}, {0, -1}, {1, -1}, {1, 0}, {1, 1}, {0, 1}, {-1, 1}, {-1, 0}}};

inline std::vector<float> extract_lbp(const FrameImage& frame) {
  if (frame.width < 3 || frame.height < 3) throw std::invalid_argument("LBP needs an image of at least 3x3 pixels");
  std::vector<std::uint8_t> gray(std::size_t(frame.width) * frame.height);
  for (std::uint32_t y = 0; y < frame.height; ++y)
    for (std::uint32_t x = 0; x < frame.width; ++x) gray[std::size_t(y) * frame.width + x] = luma(frame.at(x, y));

  std::vector<double> counts(256, 0.0);
  std::size_t emitted = 0;
  for (std::uint32_t y = 1; y + 1 < frame.height; ++y) {
    for (std::uint32_t x = 1; x + 1 < frame.width; ++x) {
      const auto centre = gray[std::size_t(y) * frame.width + x];
      unsigned code = 0;
      for (std::size_t b = 0; b < kLbpNeighbours.size(); ++b) {
        const auto nx = x + kLbpNeighbours[b][0];
        const auto ny = y + kLbpNeighbours[b][1];
        if (gray[std::size_t(ny) * frame.width + nx] >= centre) code |= 1u << b;
      }
      counts[code] += 1.0;
      ++emitted;
    }
  }
  std::vector<float> out(256);
  for (std::size_t i = 0; i < 256; ++i) out[i] = static_cast<float>(counts[i] / static_cast<double>(emitted));
  return out;
}

// ---------------------------------------------------------------------------
// FVDS container

inline constexpr std::string_view kDescriptorMagic = "FVDS";
inline constexpr std::uint16_t kDescriptorVersion = 1;

inline std::string encode_descriptors(const DescriptorSequence& seq) {
  ByteWriter w;
  w.put_raw(kDescriptorMagic);
  w.put_u16(kDescriptorVersion);
  if (seq.channels.size() > 0xffff) throw std::invalid_argument("too many channels");
  w.put_u16(static_cast<std::uint16_t>(seq.channels.size()));
  for (const auto& c : seq.channels) {
    if (c.name.size() > 0xffff) throw std::invalid_argument("channel name too long");
    w.put_u16(static_cast<std::uint16_t>(c.name.size()));
    w.put_raw(c.name);
    w.put_u32(c.dim);
    w.put_u32(static_cast<std::uint32_t>(c.count()));
    for (float f : c.data) w.put_f32(f);
  }
  return w.take();
}

inline DescriptorSequence decode_descriptors(std::string_view bytes, VideoId video_id = {}) {
  ByteReader r(bytes);
  if (bytes.size() < 4 || r.get_raw(4) != kDescriptorMagic) throw DataError("descriptor file: magic mismatch");
  const auto version = r.get_u16();
  if (version != kDescriptorVersion) throw DataError("descriptor file: unsupported version " + std::to_string(version));
  const auto n_channels = r.get_u16();
  DescriptorSequence seq;
  seq.video_id = std::move(video_id);
  for (std::uint16_t i = 0; i < n_channels; ++i) {
    Channel c;
    c.name = std::string(r.get_raw(r.get_u16()));
    c.dim = r.get_u32();
    const auto count = r.get_u32();
    if (c.dim == 0) throw DataError("descriptor file: channel '" + c.name + "' has dimension 0");
    if (std::uint64_t(c.dim) * count * 4 > r.remaining())
      throw DataError("descriptor file: truncated payload in channel '" + c.name + "'");
    c.data.resize(std::size_t(c.dim) * count);
    for (auto& f : c.data) {
      f = r.get_f32();
      if (!std::isfinite(f)) throw DataError("descriptor file: non-finite value in channel '" + c.name + "'");
    }
    if (!seq.channels.empty() && seq.channels.front().count() != c.count())
      throw DataError("descriptor file: channel '" + c.name + "' vector count differs from first channel");
    seq.channels.push_back(std::move(c));
  }
  if (!r.at_end()) throw DataError("descriptor file: payload size does not match declared dims");
  return seq;
}

inline void write_descriptors(const std::string& path, const DescriptorSequence& seq) {
  write_file(path, encode_descriptors(seq));
}

// The video id is taken from the file stem.
inline DescriptorSequence load_descriptors(const std::string& path) {
  return decode_descriptors(read_file(path), std::filesystem::path(path).stem().string());
}

// ---------------------------------------------------------------------------
// Binary PPM (P6, maxval 255) keyframe images.

inline FrameImage decode_ppm(std::string_view bytes) {
  std::size_t pos = 0;
  auto token = [&]() -> std::string {
    for (;;) {
      while (pos < bytes.size() && std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
      if (pos < bytes.size() && bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
        continue;
      }
      break;
    }
    const auto start = pos;
    while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
    return std::string(bytes.substr(start, pos - start));
  };
  if (token() != "P6") throw DataError("not a binary PPM (P6) image");
  auto w = parse_int(token());
  auto h = parse_int(token());
  auto maxval = parse_int(token());
  if (!w || !h || *w <= 0 || *h <= 0) throw DataError("PPM: invalid dimensions");
  if (!maxval || *maxval != 255) throw DataError("PPM: only maxval 255 is supported");
  ++pos;  // single whitespace before the raster
  const std::size_t need = 3ull * std::size_t(*w) * std::size_t(*h);
  if (bytes.size() < pos + need) throw DataError("PPM: truncated raster");
  std::vector<std::uint8_t> px(bytes.begin() + pos, bytes.begin() + pos + need);
  return FrameImage(static_cast<std::uint32_t>(*w), static_cast<std::uint32_t>(*h), std::move(px));
}

inline std::string encode_ppm(const FrameImage& f) {
  std::string out = "P6\n" + std::to_string(f.width) + " " + std::to_string(f.height) + "\n255\n";
  out.append(reinterpret_cast<const char*>(f.pixels.data()), f.pixels.size());
  return out;
}

struct ExtractOptions {
  bool hsv = true;
  bool lbp = true;
  // When set, the directory holds every decoded frame at this rate and one
  // keyframe per second is sampled; otherwise every image is a keyframe.
  std::optional<double> fps;
};

// Builds a descriptor sequence from the *.ppm files of a directory, in
// lexicographic filename order. Channels are named "hsv" and "lbp".
inline DescriptorSequence extract_directory(const std::string& dir, const ExtractOptions& opts) {
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".ppm") files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  if (files.empty()) throw DataError("no .ppm frames in " + dir);
  std::vector<std::size_t> picks;
  if (opts.fps) {
    picks = keyframe_indices(files.size(), *opts.fps);
  } else {
    picks.resize(files.size());
    for (std::size_t i = 0; i < picks.size(); ++i) picks[i] = i;
  }
  DescriptorSequence seq;
  seq.video_id = std::filesystem::path(dir).filename().string();
  Channel hsv{"hsv", HsvBinning{}.size(), {}};
  Channel lbp{"lbp", 256, {}};
  for (auto i : picks) {
    const auto frame = decode_ppm(read_file(files[i].string()));
    if (opts.hsv) hsv.push(extract_hsv_histogram(frame));
    if (opts.lbp) lbp.push(extract_lbp(frame));
  }
  if (opts.hsv) seq.channels.push_back(std::move(hsv));
  if (opts.lbp) seq.channels.push_back(std::move(lbp));
  return seq;
}

}  // namespace fivr::features
