#pragma once

#include <stdexcept>
#include <string>

namespace skillrrt {

/// Raised when an operation receives malformed input (non-finite poses,
/// out-of-range parameters).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a domain or run configuration is inconsistent: unknown region
/// or skill ids, missing connector mappings, parse failures.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
  ConfigError(const std::string& what, int line, std::string key_path)
      : std::runtime_error(Format(what, line, key_path)),
        line_(line),
        key_path_(std::move(key_path)) {}

  int line() const { return line_; }
  const std::string& key_path() const { return key_path_; }

 private:
  static std::string Format(const std::string& what, int line, const std::string& key) {
    std::string out;
    if (line > 0) out += "line " + std::to_string(line) + ": ";
    if (!key.empty()) out += "[" + key + "] ";
    return out + what;
  }

  int line_ = 0;
  std::string key_path_;
};

/// No grasp is shared between the current and the desired object pose, so a
/// prehensile skill has no pre-contact configuration.
class NoPreContact : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace skillrrt
