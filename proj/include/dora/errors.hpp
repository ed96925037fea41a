#pragma once

#include <stdexcept>
#include <string>

namespace dora {

// Bad configuration: invalid values, impossible placements, malformed files.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Filesystem failures; carries the offending path in the message.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace dora
