#include "nirattack/log.hpp"

#include <spdlog/spdlog.h>

#include "nirattack/error.hpp"

namespace nirattack {

void set_log_level(const std::string& level) {
  const auto parsed = spdlog::level::from_str(level);
  if (parsed == spdlog::level::off && level != "off")
    throw ConfigError("unknown log level '" + level + "'");
  spdlog::set_level(parsed);
}

}  // namespace nirattack
