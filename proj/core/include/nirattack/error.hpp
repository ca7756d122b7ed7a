#pragma once

#include <stdexcept>
#include <string>

namespace nirattack {

/// Base of every error raised by the library. `stage()` names the pipeline
/// stage; the command-line tool maps it to an exit code.
class Error : public std::runtime_error {
 public:
  enum class Stage { kGeneric, kConfig, kDataset, kTransport, kMetric };

  explicit Error(const std::string& what, Stage stage = Stage::kGeneric)
      : std::runtime_error(what), stage_(stage) {}

  Stage stage() const noexcept { return stage_; }

 private:
  Stage stage_;
};

// Malformed input file (mesh, scheme, pattern, config). Carries the
// position of the offending record when one is known.
class ParseError : public Error {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& msg)
      : Error(source + ":" + std::to_string(line) + ": " + msg, Stage::kDataset),
        line_(line) {}
  explicit ParseError(const std::string& msg) : Error(msg, Stage::kDataset), line_(0) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& msg) : Error(msg, Stage::kConfig) {}
};

class DatasetError : public Error {
 public:
  explicit DatasetError(const std::string& msg) : Error(msg, Stage::kDataset) {}
};

/// Detector could not be reached, timed out, or answered with a non-200
/// status. Retryable.
class TransportError : public Error {
 public:
  explicit TransportError(const std::string& msg) : Error(msg, Stage::kTransport) {}
};

/// Detector answered 200 but the body does not follow the wire schema.
class MalformedResponse : public Error {
 public:
  explicit MalformedResponse(const std::string& msg) : Error(msg, Stage::kTransport) {}
};

/// A metric is undefined for its inputs (e.g. ASR with no true positives
/// in the unattacked condition).
class MetricUndefined : public Error {
 public:
  explicit MetricUndefined(const std::string& msg) : Error(msg, Stage::kMetric) {}
};

}  // namespace nirattack
