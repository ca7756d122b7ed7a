#pragma once

#include <string>

namespace nirattack {

/// Sets the library log level: trace, debug, info, warn, error, off.
/// Throws ConfigError on an unknown name.
void set_log_level(const std::string& level);

}  // namespace nirattack
