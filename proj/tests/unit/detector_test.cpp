#include <gtest/gtest.h>

#include <atomic>
#include <cmath>
#include <thread>

#include "nirattack/compositor.hpp"
#include "nirattack/detector.hpp"
#include "nirattack/error.hpp"
#include "nirattack/pattern.hpp"
#include "nirattack/rng.hpp"
#include "test_support.hpp"

namespace nirattack {
namespace {

using testing::logistic;

TEST(SyntheticDetector, BlankImageZeroWeightsIsHalf) {
  const SegMap sm(8, 8, std::vector<std::uint8_t>(64, 0));
  const SyntheticDetector det(std::vector<double>(3, 0.0), 0.0);
  const auto dets = det.detect(NirImage(8, 8, 0), sm);
  ASSERT_EQ(dets.size(), 1u);
  EXPECT_EQ(dets[0].label, "person");
  EXPECT_DOUBLE_EQ(dets[0].confidence, 0.5);
}

TEST(SyntheticDetector, SingleWhiteSegmentHandValue) {
  const SegMap sm(4, 4, std::vector<std::uint8_t>(16, 0));
  const double w[] = {-4.0};
  const double c = synthetic_confidence(NirImage(4, 4, 255), sm, w, 2.0);
  EXPECT_NEAR(c, 0.11920292202211755, 1e-15);
}

TEST(SyntheticDetector, BoxIsSilhouetteOrWholeFrame) {
  std::vector<std::uint8_t> labels(100, SegMap::kBackground);
  for (int y = 2; y < 5; ++y)
    for (int x = 3; x < 7; ++x) labels[y * 10 + x] = 1;
  const SyntheticDetector det({0.0, 0.0}, 0.0);
  const auto a = det.detect(NirImage(10, 10), SegMap(10, 10, labels));
  ASSERT_EQ(a.size(), 1u);
  EXPECT_EQ(a[0].box, (DetectionBox{3, 2, 7, 5}));
  const auto b = det.detect(NirImage(10, 10), SegMap(10, 10, std::vector<std::uint8_t>(100, SegMap::kBackground)));
  EXPECT_EQ(b[0].box, (DetectionBox{0, 0, 10, 10}));
}

TEST(SyntheticDetector, BelowWireFloorIsDropped) {
  const SegMap sm(4, 4, std::vector<std::uint8_t>(16, 0));
  const SyntheticDetector det({-20.0}, 0.0);
  EXPECT_TRUE(det.detect(NirImage(4, 4, 255), sm).empty());
}

TEST(SyntheticDetector, DimensionMismatchThrows) {
  const double w[] = {1.0};
  EXPECT_THROW(synthetic_confidence(NirImage(4, 4), SegMap(4, 5, std::vector<std::uint8_t>(20, 0)), w, 0.0),
               DatasetError);
}

class BruteForce : public ::testing::TestWithParam<int> {};

TEST_P(BruteForce, MinimizerIsNegativeWeightIndicator) {
  const int k = GetParam();
  const auto scheme = std::make_shared<const SegmentScheme>(SegmentScheme::uniform("bf", k, {0}));
  std::vector<std::uint8_t> labels;
  // One column of pixels per segment keeps every segment present.
  for (int y = 0; y < 3; ++y)
    for (int s = 0; s < k; ++s) labels.push_back(static_cast<std::uint8_t>(s));
  const SegMap sm(k, 3, labels);
  const NirImage bg(k, 3, 77);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto det = SyntheticDetector::random(seed, k, 0.3, 2.0);
    double best = 2.0;
    std::uint32_t best_mask = 0;
    for (std::uint32_t m = 0; m < (1u << k); ++m) {
      if (m & 1u) continue;  // segment 0 forced
      std::vector<std::uint8_t> bits(k);
      for (int s = 0; s < k; ++s) bits[s] = (m >> s) & 1u;
      const double c = synthetic_confidence(synthesize_attack(sm, BinaryPattern(bits, scheme), bg), sm,
                                            det.weights(), det.bias());
      if (c < best) best = c, best_mask = m;
    }
    std::uint32_t expected = 0;
    double logit = det.bias();
    for (int s = 1; s < k; ++s)
      if (det.weights()[s] < 0) expected |= 1u << s, logit += det.weights()[s];
    EXPECT_EQ(best_mask, expected);
    EXPECT_NEAR(best, logistic(logit), 1e-12);
  }
}

INSTANTIATE_TEST_SUITE_P(SmallK, BruteForce, ::testing::Values(3, 6, 9, 12));

TEST(SyntheticDetector, MonotoneInEachFreeBit) {
  const int k = 8;
  const auto scheme = std::make_shared<const SegmentScheme>(SegmentScheme::uniform("m8", k, {0}));
  std::vector<std::uint8_t> labels;
  for (int s = 0; s < k; ++s) labels.insert(labels.end(), 4, static_cast<std::uint8_t>(s));
  const SegMap sm(k * 4, 1, labels);
  const NirImage bg(k * 4, 1, 0);
  const auto det = SyntheticDetector::random(11, k, 0.0);
  Rng rng(3);
  for (int t = 0; t < 200; ++t) {
    const auto p = new_random(rng(), scheme);
    const double c = synthetic_confidence(synthesize_attack(sm, p, bg), sm, det.weights(), 0.0);
    for (std::size_t s = 1; s < static_cast<std::size_t>(k); ++s) {
      if (p.bit(s)) continue;
      const double up = synthetic_confidence(synthesize_attack(sm, flip(p, s), bg), sm, det.weights(), 0.0);
      if (det.weights()[s] < 0) EXPECT_LT(up, c);
      if (det.weights()[s] > 0) EXPECT_GT(up, c);
    }
  }
}

TEST(Normalize, FloorClipSortAndErrors) {
  std::vector<Detection> in = {
      {"person", 0.4, {-5, 2, 10, 8}},
      {"person", 0.0005, {0, 0, 1, 1}},
      {"car", 0.9, {1, 1, 3, 3}},
      {"person", 0.7, {30, 30, 40, 40}},  // fully outside
      {"person", 0.4, {0, 0, 2, 2}},
  };
  const auto out = normalize_detections(in, 20, 20);
  ASSERT_EQ(out.size(), 3u);
  EXPECT_EQ(out[0].label, "car");
  EXPECT_EQ(out[1].box, (DetectionBox{0, 2, 10, 8}));
  EXPECT_EQ(out[2].box, (DetectionBox{0, 0, 2, 2}));
  EXPECT_THROW(normalize_detections({{"person", 1.5, {0, 0, 1, 1}}}, 5, 5), MalformedResponse);
  EXPECT_THROW(normalize_detections({{"person", 0.5, {3, 0, 1, 1}}}, 5, 5), MalformedResponse);
}

TEST(MaxPersonConfidence, IgnoresOtherLabelsAndThreshold) {
  const std::vector<Detection> d = {{"car", 0.9, {}}, {"person", 0.3, {}}, {"person", 0.2, {}}};
  EXPECT_DOUBLE_EQ(max_person_confidence(d), 0.3);
  EXPECT_DOUBLE_EQ(max_person_confidence(d, 0.5), 0.0);
  EXPECT_DOUBLE_EQ(max_person_confidence({}), 0.0);
}

TEST(WireFormat, RoundTripAndMalformed) {
  const WireResponse r{{{"person", 0.87, {1, 2, 30, 40}}, {"person", 0.25, {5, 5, 6, 6}}}, "stub"};
  const auto back = parse_wire_response(format_wire_response(r), 64, 64);
  EXPECT_EQ(back.detections, r.detections);
  EXPECT_EQ(back.model, "stub");
  EXPECT_THROW(parse_wire_response("not json", 64, 64), MalformedResponse);
  EXPECT_THROW(parse_wire_response(R"({"model":"x"})", 64, 64), MalformedResponse);
  EXPECT_THROW(parse_wire_response(R"({"detections":[{"label":"person","confidence":0.5,"box":[1,2]}]})", 64, 64),
               MalformedResponse);
  EXPECT_THROW(parse_wire_response(R"({"detections":[{"label":"person","confidence":"hi","box":[1,2,3,4]}]})", 64,
                                   64),
               MalformedResponse);
}

TEST(MakeDetector, ParsesSpecs) {
  const auto a = make_detector("synthetic:bias=1.5,weights=1;-2;3", 3);
  const auto* sa = dynamic_cast<const SyntheticDetector*>(a.get());
  ASSERT_NE(sa, nullptr);
  EXPECT_EQ(sa->weights(), (std::vector<double>{1, -2, 3}));
  EXPECT_DOUBLE_EQ(sa->bias(), 1.5);

  const auto b = make_detector("synthetic:bias=0,seed=4,scale=0.5", 6);
  const auto* sb = dynamic_cast<const SyntheticDetector*>(b.get());
  ASSERT_NE(sb, nullptr);
  EXPECT_EQ(sb->weights(), SyntheticDetector::random(4, 6, 0, 0.5).weights());

  const auto c = make_detector("http://127.0.0.1:9,timeout_ms=50,retries=0,policy=lenient", 3);
  const auto* rc = dynamic_cast<const RemoteDetector*>(c.get());
  ASSERT_NE(rc, nullptr);
  EXPECT_EQ(rc->options().retries, 0);
  EXPECT_EQ(rc->options().policy, ResponsePolicy::kLenient);

  EXPECT_THROW(make_detector("synthetic:bias=1,weights=1;2", 3), ConfigError);
  EXPECT_THROW(make_detector("synthetic:bias=x,seed=1", 3), ConfigError);
  EXPECT_THROW(make_detector("synthetic:bias=1", 3), ConfigError);
  EXPECT_THROW(make_detector("yolo", 3), ConfigError);
}

class CountingDetector final : public DetectorClient {
 public:
  std::vector<Detection> detect(const NirImage& image, const SegMap&) const override {
    const int now = ++in_flight_;
    int seen = peak_.load();
    while (now > seen && !peak_.compare_exchange_weak(seen, now)) {}
    std::this_thread::sleep_for(std::chrono::milliseconds(2));
    --in_flight_;
    return {{"person", image.pixels()[0] / 255.0, {0, 0, 1, 1}}};
  }
  std::string model_id() const override { return "counting"; }
  int peak() const { return peak_; }

 private:
  mutable std::atomic<int> in_flight_{0};
  mutable std::atomic<int> peak_{0};
};

TEST(DetectBatch, OrderPreservedAndConcurrencyBounded) {
  std::vector<NirImage> imgs;
  for (int i = 0; i < 40; ++i) imgs.emplace_back(2, 2, static_cast<std::uint8_t>(i * 5));
  const SegMap sm(2, 2, std::vector<std::uint8_t>(4, 0));
  std::vector<DetectItem> items;
  for (const auto& im : imgs) items.push_back({&im, &sm});
  CountingDetector det;
  const auto out = detect_batch(det, items, 3);
  ASSERT_EQ(out.size(), 40u);
  for (int i = 0; i < 40; ++i) EXPECT_DOUBLE_EQ(out[i][0].confidence, i * 5 / 255.0);
  EXPECT_LE(det.peak(), 3);
}

}  // namespace
}  // namespace nirattack
