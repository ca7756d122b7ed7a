// Keep Eigen (via detector.hpp) ahead of httplib: <resolv.h> defines `_res`.
#include "nirattack/detector.hpp"
#include "nirattack/error.hpp"
#include "nirattack/png_io.hpp"

#include <spdlog/spdlog.h>

#include "httplib.h"
#include "json.hpp"

namespace nirattack {

namespace {

httplib::Client make_client(const RemoteOptions& opt) {
  httplib::Client cli(opt.url);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(opt.timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(opt.timeout - secs);
  cli.set_connection_timeout(secs.count(), usecs.count());
  cli.set_read_timeout(secs.count(), usecs.count());
  cli.set_write_timeout(secs.count(), usecs.count());
  cli.set_keep_alive(false);
  return cli;
}

}  // namespace

RemoteDetector::RemoteDetector(RemoteOptions options) : options_(std::move(options)) {
  if (options_.url.rfind("http://", 0) != 0) throw ConfigError("detector url must start with http://");
  if (options_.retries < 0) throw ConfigError("detector retry budget must be >= 0");
  if (options_.timeout.count() <= 0) throw ConfigError("detector timeout must be positive");
}

std::vector<Detection> RemoteDetector::detect(const NirImage& image, const SegMap&) const {
  const std::vector<std::uint8_t> png = encode_png_rgb(image);
  const std::string body(png.begin(), png.end());

  std::string last_error;
  for (int attempt = 0; attempt <= options_.retries; ++attempt) {
    auto cli = make_client(options_);
    auto res = cli.Post("/detect", body, "image/png");
    if (!res) {
      last_error = "request to " + options_.url + "/detect failed: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status != 200) {
      last_error = options_.url + "/detect answered HTTP " + std::to_string(res->status);
      continue;
    }
    try {
      WireResponse parsed = parse_wire_response(res->body, image.width(), image.height());
      return std::move(parsed.detections);
    } catch (const MalformedResponse& e) {
      if (options_.policy == ResponsePolicy::kStrict) throw;
      spdlog::warn("lenient policy: treating malformed detector response as no detections ({})", e.what());
      return {};
    }
  }
  throw TransportError(last_error);
}

std::string RemoteDetector::model_id() const {
  auto cli = make_client(options_);
  if (auto res = cli.Get("/model"); res && res->status == 200) {
    const auto j = nlohmann::json::parse(res->body, nullptr, false);
    if (j.is_object() && j.contains("model") && j["model"].is_string()) return j["model"].get<std::string>();
  }
  return options_.url;
}

bool RemoteDetector::healthy() const {
  auto cli = make_client(options_);
  auto res = cli.Get("/healthz");
  return res && res->status == 200;
}

}  // namespace nirattack
