#include "nirattack/detector.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>

#include "json.hpp"
#include "nirattack/error.hpp"
#include "nirattack/parallel.hpp"
#include "nirattack/rng.hpp"

namespace nirattack {

using nlohmann::json;

DetectionBox to_detection_box(const PixelBox& box) {
  return {static_cast<double>(box.x_min), static_cast<double>(box.y_min),
          static_cast<double>(box.x_max), static_cast<double>(box.y_max)};
}

double max_person_confidence(std::span<const Detection> detections, double threshold) {
  double best = 0.0;
  for (const auto& d : detections)
    if (d.label == kPersonLabel && d.confidence >= threshold) best = std::max(best, d.confidence);
  return best;
}

std::vector<Detection> normalize_detections(std::vector<Detection> detections, int width, int height) {
  std::vector<Detection> out;
  out.reserve(detections.size());
  for (auto& d : detections) {
    if (!std::isfinite(d.confidence) || d.confidence < 0.0 || d.confidence > 1.0)
      throw MalformedResponse("detection confidence " + std::to_string(d.confidence) +
                              " outside [0,1]");
    const auto& b = d.box;
    if (!std::isfinite(b.x1) || !std::isfinite(b.y1) || !std::isfinite(b.x2) || !std::isfinite(b.y2) ||
        !(b.x1 < b.x2) || !(b.y1 < b.y2))
      throw MalformedResponse("detection box is not a proper rectangle");
    if (d.confidence < kWireFloor) continue;
    d.box.x1 = std::clamp(b.x1, 0.0, static_cast<double>(width));
    d.box.x2 = std::clamp(b.x2, 0.0, static_cast<double>(width));
    d.box.y1 = std::clamp(b.y1, 0.0, static_cast<double>(height));
    d.box.y2 = std::clamp(b.y2, 0.0, static_cast<double>(height));
    if (!(d.box.x1 < d.box.x2) || !(d.box.y1 < d.box.y2)) continue;
    out.push_back(std::move(d));
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const Detection& a, const Detection& b) { return a.confidence > b.confidence; });
  return out;
}

std::vector<double> segment_means(const NirImage& image, const SegMap& segmap, std::size_t k) {
  if (image.width() != segmap.width() || image.height() != segmap.height())
    throw DatasetError("image and segmap dimensions differ");
  std::vector<std::uint64_t> sum(k, 0), count(k, 0);
  auto labels = segmap.labels();
  auto px = image.pixels();
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const std::uint8_t l = labels[i];
    if (l < k) {
      sum[l] += px[i];
      ++count[l];
    }
  }
  std::vector<double> means(k, 0.0);
  for (std::size_t s = 0; s < k; ++s)
    if (count[s]) means[s] = static_cast<double>(sum[s]) / (255.0 * static_cast<double>(count[s]));
  return means;
}

double synthetic_confidence(const NirImage& image, const SegMap& segmap,
                            std::span<const double> weights, double bias) {
  const auto means = segment_means(image, segmap, weights.size());
  double logit = bias;
  for (std::size_t s = 0; s < weights.size(); ++s) logit += weights[s] * means[s];
  return 1.0 / (1.0 + std::exp(-logit));
}

SyntheticDetector::SyntheticDetector(std::vector<double> weights, double bias)
    : weights_(std::move(weights)), bias_(bias) {
  if (weights_.empty()) throw ConfigError("synthetic detector needs at least one weight");
  for (double w : weights_)
    if (!std::isfinite(w)) throw ConfigError("synthetic detector weight is not finite");
  if (!std::isfinite(bias_)) throw ConfigError("synthetic detector bias is not finite");
}

SyntheticDetector SyntheticDetector::random(std::uint64_t seed, std::size_t k, double bias, double scale) {
  Rng rng(derive_seed(seed, {0x5e7}));
  std::vector<double> w(k);
  for (double& v : w) v = uniform_real(rng, -scale, scale);
  return SyntheticDetector(std::move(w), bias);
}

std::vector<Detection> SyntheticDetector::detect(const NirImage& image, const SegMap& layout) const {
  const double conf = synthetic_confidence(image, layout, weights_, bias_);
  if (conf < kWireFloor) return {};
  DetectionBox box{0, 0, static_cast<double>(image.width()), static_cast<double>(image.height())};
  if (const auto& sil = layout.silhouette_box()) box = to_detection_box(*sil);
  return {Detection{kPersonLabel, conf, box}};
}

std::string SyntheticDetector::model_id() const {
  std::ostringstream os;
  os << "synthetic-linear-logit(k=" << weights_.size() << ",bias=" << bias_ << ")";
  return os.str();
}

std::vector<Detection> ConstantDetector::detect(const NirImage& image, const SegMap&) const {
  return normalize_detections(detections_, image.width(), image.height());
}

WireResponse parse_wire_response(const std::string& body, int width, int height) {
  WireResponse out;
  std::vector<Detection> raw;
  try {
    const json j = json::parse(body);
    if (!j.is_object() || !j.contains("detections") || !j["detections"].is_array())
      throw MalformedResponse("response lacks a 'detections' array");
    for (const auto& d : j["detections"]) {
      const auto& box = d.at("box");
      if (!box.is_array() || box.size() != 4) throw MalformedResponse("box must have 4 numbers");
      Detection det;
      det.label = d.at("label").get<std::string>();
      det.confidence = d.at("confidence").get<double>();
      det.box = {box[0].get<double>(), box[1].get<double>(), box[2].get<double>(), box[3].get<double>()};
      raw.push_back(std::move(det));
    }
    out.model = j.contains("model") && j["model"].is_string() ? j["model"].get<std::string>() : "unknown";
  } catch (const json::exception& e) {
    throw MalformedResponse(std::string("malformed detector response: ") + e.what());
  }
  out.detections = normalize_detections(std::move(raw), width, height);
  return out;
}

std::string format_wire_response(const WireResponse& response) {
  json dets = json::array();
  for (const auto& d : response.detections)
    dets.push_back({{"label", d.label},
                    {"confidence", d.confidence},
                    {"box", {d.box.x1, d.box.y1, d.box.x2, d.box.y2}}});
  return json{{"detections", dets}, {"model", response.model}}.dump();
}

namespace {

std::vector<std::pair<std::string, std::string>> split_params(const std::string& s) {
  std::vector<std::pair<std::string, std::string>> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw ConfigError("detector parameter '" + item + "' lacks '='");
    out.emplace_back(item.substr(0, eq), item.substr(eq + 1));
  }
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("detector parameter " + key + ": '" + v + "' is not a number");
  }
}

}  // namespace

std::unique_ptr<DetectorClient> make_detector(const std::string& spec, std::size_t k) {
  static const std::string kSynthetic = "synthetic:";
  if (spec.rfind(kSynthetic, 0) == 0) {
    double bias = 0.0, scale = 2.0;
    std::optional<std::uint64_t> seed;
    std::vector<double> weights;
    for (const auto& [key, value] : split_params(spec.substr(kSynthetic.size()))) {
      if (key == "bias") {
        bias = to_double(key, value);
      } else if (key == "scale") {
        scale = to_double(key, value);
      } else if (key == "seed") {
        seed = static_cast<std::uint64_t>(to_double(key, value));
      } else if (key == "weights") {
        std::stringstream ws(value);
        std::string w;
        while (std::getline(ws, w, ';')) weights.push_back(to_double(key, w));
      } else {
        throw ConfigError("unknown synthetic detector parameter '" + key + "'");
      }
    }
    if (!weights.empty()) {
      if (weights.size() != k)
        throw ConfigError("synthetic detector has " + std::to_string(weights.size()) +
                          " weights, scheme K=" + std::to_string(k));
      return std::make_unique<SyntheticDetector>(std::move(weights), bias);
    }
    if (!seed) throw ConfigError("synthetic detector needs either weights= or seed=");
    return std::make_unique<SyntheticDetector>(SyntheticDetector::random(*seed, k, bias, scale));
  }
  if (spec.rfind("http://", 0) == 0) {
    RemoteOptions opt;
    const auto comma = spec.find(',');
    opt.url = spec.substr(0, comma);
    if (comma != std::string::npos)
      for (const auto& [key, value] : split_params(spec.substr(comma + 1))) {
        if (key == "timeout_ms")
          opt.timeout = std::chrono::milliseconds(static_cast<long>(to_double(key, value)));
        else if (key == "retries")
          opt.retries = static_cast<int>(to_double(key, value));
        else if (key == "policy" && (value == "strict" || value == "lenient"))
          opt.policy = value == "strict" ? ResponsePolicy::kStrict : ResponsePolicy::kLenient;
        else
          throw ConfigError("unknown remote detector parameter '" + key + "=" + value + "'");
      }
    return std::make_unique<RemoteDetector>(std::move(opt));
  }
  throw ConfigError("unrecognised detector spec '" + spec + "'");
}

std::vector<std::vector<Detection>> detect_batch(const DetectorClient& client,
                                                 std::span<const DetectItem> items,
                                                 std::size_t max_in_flight) {
  std::vector<std::vector<Detection>> out(items.size());
  parallel_for(items.size(), std::max<std::size_t>(1, max_in_flight), [&](std::size_t i) {
    out[i] = client.detect(*items[i].image, *items[i].layout);
  });
  return out;
}

}  // namespace nirattack
