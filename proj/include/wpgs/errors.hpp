#pragma once

#include <stdexcept>
#include <string>

namespace wpgs {

// Invalid configuration values (bad lengths, malformed files, unknown keys).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Shape mismatch between masks, layouts, and field vectors.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Not enough occupied sources to fill the requested targets.
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A trap amplitude fell below the dark floor during a weight update.
class DarkTrapError : public std::runtime_error {
 public:
  DarkTrapError(const std::string& what, long trap, long frame = -1)
      : std::runtime_error(what), trap_(trap), frame_(frame) {}

  long trap() const noexcept { return trap_; }
  long frame() const noexcept { return frame_; }

  DarkTrapError at_frame(long frame) const {
    return DarkTrapError("frame " + std::to_string(frame) + ": " + what(), trap_, frame);
  }

 private:
  long trap_;
  long frame_;
};

}  // namespace wpgs
