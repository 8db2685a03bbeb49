#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <numeric>

#include "fivr/features.hpp"

using namespace fivr;
using namespace fivr::features;

namespace {

FrameImage random_image(Rng& rng, std::uint32_t w, std::uint32_t h) {
  std::vector<std::uint8_t> px(3ull * w * h);
  for (auto& p : px) p = static_cast<std::uint8_t>(rng.below(256));
  return FrameImage(w, h, std::move(px));
}

// Floating-point HSV conversion and binning.
std::size_t reference_hsv_bin(int r, int g, int b) {
  const int mx = std::max({r, g, b}), mn = std::min({r, g, b});
  const double delta = mx - mn;
  double sector = 0.0;  // hue in units of 60 degrees
  if (delta > 0) {
    if (mx == r)
      sector = std::fmod((g - b) / delta + 6.0, 6.0);
    else if (mx == g)
      sector = (b - r) / delta + 2.0;
    else
      sector = (r - g) / delta + 4.0;
  }
  const auto h = std::min<std::size_t>(7, static_cast<std::size_t>(std::floor(sector * 8.0 / 6.0)));
  const auto s = mx == 0 ? 0 : std::min<std::size_t>(7, static_cast<std::size_t>(std::floor(8.0 * delta / mx)));
  const auto v = std::min<std::size_t>(7, static_cast<std::size_t>(std::floor(8.0 * mx / 255.0)));
  return h * 64 + s * 8 + v;
}

double sum(const std::vector<float>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

}  // namespace

TEST(Keyframes, OnePerSecond) {
  EXPECT_EQ(keyframe_indices(90 * 30, 30.0).size(), 90u);
  EXPECT_EQ(keyframe_indices(15, 30.0), std::vector<std::size_t>{0});
  const auto idx = keyframe_indices(240, 24.0);
  ASSERT_EQ(idx.size(), 10u);
  for (std::size_t i = 0; i < idx.size(); ++i) EXPECT_EQ(idx[i], 24 * i);
  EXPECT_THROW(keyframe_indices(0, 30.0), std::invalid_argument);
  EXPECT_THROW(keyframe_indices(10, 0.0), std::invalid_argument);
}

TEST(Keyframes, CountIsCeilOfDuration) {
  for (double fps : {23.976, 24.0, 25.0, 29.97, 30.0, 59.94})
    for (std::size_t frames : {1u, 7u, 100u, 1001u, 5000u}) {
      const double duration = static_cast<double>(frames) / fps;
      EXPECT_EQ(keyframe_indices(frames, fps).size(), static_cast<std::size_t>(std::ceil(duration - 1e-9)))
          << fps << " " << frames;
    }
}

TEST(Keyframes, SamplePicksFrames) {
  std::vector<int> frames(100);
  std::iota(frames.begin(), frames.end(), 0);
  auto picked = sample_keyframes<int>(frames, 25.0);
  EXPECT_EQ(picked, (std::vector<int>{0, 25, 50, 75}));
}

TEST(Hsv, PureRedIsOneBin) {
  auto h = extract_hsv_histogram(FrameImage(4, 4, 255, 0, 0));
  ASSERT_EQ(h.size(), 512u);
  EXPECT_EQ(std::count_if(h.begin(), h.end(), [](float x) { return x > 0; }), 1);
  EXPECT_FLOAT_EQ(*std::max_element(h.begin(), h.end()), 1.0f);
}

TEST(Hsv, BlackIsInValueZeroSlice) {
  auto h = extract_hsv_histogram(FrameImage(5, 3, 0, 0, 0));
  double v0 = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i)
    if (i % 8 == 0) v0 += h[i];
  EXPECT_NEAR(v0, 1.0, 1e-6);
}

TEST(Hsv, MatchesFloatingPointTally) {
  Rng rng(4);
  for (int round = 0; round < 20; ++round) {
    const auto img = random_image(rng, 13, 11);
    std::vector<double> expect(512, 0.0);
    for (std::size_t i = 0; i < img.pixels.size(); i += 3)
      expect[reference_hsv_bin(img.pixels[i], img.pixels[i + 1], img.pixels[i + 2])] += 1.0 / (13 * 11);
    const auto h = extract_hsv_histogram(img);
    for (std::size_t b = 0; b < 512; ++b) ASSERT_NEAR(h[b], expect[b], 1e-6) << b;
    EXPECT_NEAR(sum(h), 1.0, 1e-6);
  }
}

TEST(Hsv, ExhaustiveBinAgreesOnColourCube) {
  for (int r = 0; r < 256; r += 3)
    for (int g = 0; g < 256; g += 5)
      for (int b = 0; b < 256; b += 7)
        ASSERT_EQ(hsv_bin(r, g, b), reference_hsv_bin(r, g, b)) << r << "," << g << "," << b;
}

TEST(Lbp, ConstantImageIsAll255) {
  auto h = extract_lbp(FrameImage(6, 5, 40, 90, 200));
  EXPECT_FLOAT_EQ(h[255], 1.0f);
  EXPECT_NEAR(sum(h), 1.0, 1e-6);
}

TEST(Lbp, ThreeByThreeEmitsOneCode) {
  std::vector<std::uint8_t> px(27, 0);
  for (int i = 0; i < 3; ++i) px[3 * 4 + i] = 100;  // bright centre
  auto h = extract_lbp(FrameImage(3, 3, std::move(px)));
  EXPECT_FLOAT_EQ(h[0], 1.0f);
  EXPECT_EQ(std::count_if(h.begin(), h.end(), [](float x) { return x > 0; }), 1);
}

TEST(Lbp, TooSmallThrows) {
  EXPECT_THROW(extract_lbp(FrameImage(2, 5, 1, 2, 3)), std::invalid_argument);
}

TEST(Lbp, GradientMatchesBruteForceEnumeration) {
  Rng rng(8);
  for (int round = 0; round < 10; ++round) {
    const std::uint32_t w = 9, h = 7;
    std::vector<std::uint8_t> px(3ull * w * h);
    for (std::uint32_t y = 0; y < h; ++y)
      for (std::uint32_t x = 0; x < w; ++x)
        for (int c = 0; c < 3; ++c)
          px[3 * (y * w + x) + c] = static_cast<std::uint8_t>((x * 20 + y * 7 + rng.below(15)) % 256);
    FrameImage img(w, h, px);
    std::vector<double> expect(256, 0.0);
    auto gray = [&](int x, int y) { return luma(img.at(static_cast<std::uint32_t>(x), static_cast<std::uint32_t>(y))); };
    // Bits 0..7: top-left, top, top-right, right, bottom-right, bottom, bottom-left, left.
    const int dx[8] = {-1, 0, 1, 1, 1, 0, -1, -1};
    const int dy[8] = {-1, -1, -1, 0, 1, 1, 1, 0};
    for (int y = 1; y < static_cast<int>(h) - 1; ++y)
      for (int x = 1; x < static_cast<int>(w) - 1; ++x) {
        int code = 0;
        for (int b = 0; b < 8; ++b) code += (gray(x + dx[b], y + dy[b]) >= gray(x, y)) << b;
        expect[code] += 1.0 / ((w - 2) * (h - 2));
      }
    const auto got = extract_lbp(img);
    for (int b = 0; b < 256; ++b) ASSERT_NEAR(got[b], expect[b], 1e-6);
  }
}

TEST(Histograms, InvariantToPixelOrderForHsv) {
  Rng rng(12);
  auto img = random_image(rng, 8, 8);
  auto shuffled = img;
  std::vector<std::size_t> perm(64);
  std::iota(perm.begin(), perm.end(), 0);
  rng.shuffle(perm);
  for (std::size_t i = 0; i < 64; ++i)
    for (int c = 0; c < 3; ++c) shuffled.pixels[3 * i + c] = img.pixels[3 * perm[i] + c];
  EXPECT_EQ(extract_hsv_histogram(img), extract_hsv_histogram(shuffled));
}

TEST(Descriptors, FormatArithmetic) {
  DescriptorSequence seq{"v", {Channel{"layer1", 4, {}}}};
  for (int i = 0; i < 3; ++i) seq.channels[0].push(std::vector<float>{1.f * i, 2, 3, 4});
  const auto bytes = encode_descriptors(seq);
  EXPECT_EQ(bytes.size(), 4u + 2 + 2 + 2 + 6 + 4 + 4 + 48);
  const auto back = decode_descriptors(bytes, "v");
  EXPECT_EQ(back, seq);
  EXPECT_EQ(back.frame_count(), 3u);
}

TEST(Descriptors, RoundTripIsBitExact) {
  Rng rng(21);
  DescriptorSequence seq{"v", {Channel{"a", 5, {}}, Channel{"b", 2, {}}}};
  for (int f = 0; f < 17; ++f) {
    std::vector<float> x(5), y(2);
    for (auto& v : x) v = static_cast<float>(rng.normal());
    for (auto& v : y) v = static_cast<float>(rng.normal() * 1e-30);
    seq.channels[0].push(x);
    seq.channels[1].push(y);
  }
  const auto bytes = encode_descriptors(seq);
  EXPECT_EQ(decode_descriptors(bytes, "v"), seq);
  EXPECT_EQ(encode_descriptors(decode_descriptors(bytes)), bytes);
}

TEST(Descriptors, CorruptFilesRejected) {
  DescriptorSequence seq{"v", {Channel{"a", 4, {1, 2, 3, 4, 5, 6, 7, 8}}}};
  const auto bytes = encode_descriptors(seq);
  EXPECT_THROW(decode_descriptors("XXXX" + bytes.substr(4)), DataError);
  EXPECT_THROW(decode_descriptors(bytes.substr(0, bytes.size() - 1)), DataError);
  EXPECT_THROW(decode_descriptors(bytes + "z"), DataError);
  EXPECT_THROW(decode_descriptors(""), DataError);
  Channel bad{"a", 4, {}};
  EXPECT_THROW(bad.push(std::vector<float>{1, 2, 3}), std::invalid_argument);
}

TEST(Descriptors, ExtractDirectoryOfPpmFrames) {
  const auto dir = std::filesystem::temp_directory_path() / "fivr_test_frames" / "clip7";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  Rng rng(30);
  for (int i = 0; i < 6; ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "f%03d.ppm", i);
    write_file((dir / name).string(), encode_ppm(random_image(rng, 8, 6)));
  }
  const auto all = extract_directory(dir.string(), {});
  EXPECT_EQ(all.video_id, "clip7");
  ASSERT_EQ(all.channels.size(), 2u);
  EXPECT_EQ(all.frame_count(), 6u);
  const auto sampled = extract_directory(dir.string(), {true, false, 2.0});
  EXPECT_EQ(sampled.frame_count(), 3u);
  EXPECT_EQ(sampled.channels[0].frame(1).size(), 512u);
  const auto f2 = decode_ppm(read_file((dir / "f002.ppm").string()));
  const auto h2 = extract_hsv_histogram(f2);
  EXPECT_TRUE(std::equal(h2.begin(), h2.end(), sampled.channels[0].frame(1).begin()));
  std::filesystem::remove_all(dir.parent_path());
}

TEST(Ppm, RejectsMalformed) {
  EXPECT_THROW(decode_ppm("P3\n1 1\n255\nabc"), DataError);
  EXPECT_THROW(decode_ppm("P6\n2 2\n255\nabc"), DataError);
  EXPECT_THROW(decode_ppm("P6\n1 1\n65535\nabcabc"), DataError);
}
