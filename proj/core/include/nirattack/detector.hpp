#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "nirattack/image.hpp"
#include "nirattack/render.hpp"

namespace nirattack {

inline constexpr double kWireFloor = 0.001;
inline constexpr const char* kPersonLabel = "person";

struct DetectionBox {
  double x1 = 0, y1 = 0, x2 = 0, y2 = 0;
  double area() const noexcept { return (x2 - x1) * (y2 - y1); }
  friend bool operator==(const DetectionBox&, const DetectionBox&) = default;
};

struct Detection {
  std::string label;
  double confidence = 0.0;
  DetectionBox box;
  friend bool operator==(const Detection&, const Detection&) = default;
};

DetectionBox to_detection_box(const PixelBox& box);

/// Black-box detector. Implementations must be safe to call concurrently;
/// a call never changes the behaviour of later calls.
class DetectorClient {
 public:
  virtual ~DetectorClient() = default;

  /// Detections with confidence >= kWireFloor, sorted by descending
  /// confidence. `layout` is the scene's segment map; remote clients never
  /// see it, only the synthetic oracle reads it.
  virtual std::vector<Detection> detect(const NirImage& image, const SegMap& layout) const = 0;

  virtual std::string model_id() const = 0;
};

/// Largest confidence among `person` detections at or above `threshold`,
/// 0 when there is none.
double max_person_confidence(std::span<const Detection> detections, double threshold = 0.0);

/// Drops detections below the wire floor, rejects invalid ones (confidence
/// outside [0,1], inverted box), clips boxes to the image, drops boxes that
/// vanish under clipping, and sorts by descending confidence (stable).
/// Throws MalformedResponse on an invalid detection.
std::vector<Detection> normalize_detections(std::vector<Detection> detections, int width, int height);

/// Mean intensity of each segment's pixels in `image`, scaled to [0,1];
/// 0 for segments absent from `segmap`.
std::vector<double> segment_means(const NirImage& image, const SegMap& segmap, std::size_t k);

/// logistic(sum_k weights[k] * mean_k + bias).
double synthetic_confidence(const NirImage& image, const SegMap& segmap,
                            std::span<const double> weights, double bias);

/// Linear-logit oracle over segment mean intensities. Reports one person
/// detection whose box is the silhouette box (whole frame when the map is
/// empty).
class SyntheticDetector final : public DetectorClient {
 public:
  SyntheticDetector(std::vector<double> weights, double bias);

  /// Weights i.i.d. uniform in [-scale, scale].
  static SyntheticDetector random(std::uint64_t seed, std::size_t k, double bias, double scale = 2.0);

  std::vector<Detection> detect(const NirImage& image, const SegMap& layout) const override;
  std::string model_id() const override;

  const std::vector<double>& weights() const noexcept { return weights_; }
  double bias() const noexcept { return bias_; }

 private:
  std::vector<double> weights_;
  double bias_;
};

/// Oracle returning the same detections for every image; used by tests and
/// dry runs.
class ConstantDetector final : public DetectorClient {
 public:
  explicit ConstantDetector(std::vector<Detection> detections) : detections_(std::move(detections)) {}
  std::vector<Detection> detect(const NirImage& image, const SegMap& layout) const override;
  std::string model_id() const override { return "constant"; }

 private:
  std::vector<Detection> detections_;
};

enum class ResponsePolicy { kStrict, kLenient };

struct RemoteOptions {
  std::string url = "http://127.0.0.1:8000";  // scheme://host:port
  std::chrono::milliseconds timeout{30000};
  int retries = 2;  // extra attempts after a transport failure
  ResponsePolicy policy = ResponsePolicy::kStrict;
};

/// HTTP client for the detector wire protocol:
///   POST /detect  (image/png, gray replicated to RGB)
///     -> 200 {"detections":[{"label","confidence","box":[x1,y1,x2,y2]}], "model":"<id>"}
///   GET /healthz  -> 200 {"status":"ok"}
/// Non-200 answers and connection failures are TransportError after the
/// retry budget is spent. A malformed 200 body raises MalformedResponse
/// under the strict policy and yields no detections under the lenient one.
class RemoteDetector final : public DetectorClient {
 public:
  explicit RemoteDetector(RemoteOptions options);

  std::vector<Detection> detect(const NirImage& image, const SegMap& layout) const override;
  std::string model_id() const override;

  bool healthy() const;
  const RemoteOptions& options() const noexcept { return options_; }

 private:
  RemoteOptions options_;
};

struct WireResponse {
  std::vector<Detection> detections;
  std::string model;
};
/// Parses a /detect response body. Throws MalformedResponse.
WireResponse parse_wire_response(const std::string& body, int width, int height);
std::string format_wire_response(const WireResponse& response);

/// Builds a client from a spec string:
///   "synthetic:bias=<b>,seed=<s>[,scale=<a>]"
///   "synthetic:bias=<b>,weights=<w0>;<w1>;..."
///   "http://host:port"  (optional ",timeout_ms=..,retries=..,policy=lenient")
/// `k` is the scheme size the synthetic oracle must cover.
std::unique_ptr<DetectorClient> make_detector(const std::string& spec, std::size_t k);

/// Runs `detect` on every item with at most `max_in_flight` concurrent
/// calls. Result i belongs to item i regardless of completion order.
struct DetectItem {
  const NirImage* image;
  const SegMap* layout;
};
std::vector<std::vector<Detection>> detect_batch(const DetectorClient& client,
                                                 std::span<const DetectItem> items,
                                                 std::size_t max_in_flight = 8);

}  // namespace nirattack
