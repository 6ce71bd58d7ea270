#pragma once

#include <stdexcept>
#include <string>

namespace qeii {

/// Bad user input: config files, CLI flags, malformed datasets.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Failure inside a pipeline stage; carries the stage tag in the message.
class StageError : public std::runtime_error {
 public:
  StageError(const std::string& stage, const std::string& what)
      : std::runtime_error(stage + ": " + what), stage_(stage) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

}  // namespace qeii
