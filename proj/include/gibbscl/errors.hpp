#pragma once

#include <stdexcept>
#include <string>

namespace gibbscl {

// Precondition violated by an argument (bad index, block size, fraction, ...).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Exact methods are capped at a lag of 20; larger problems raise this.
class UnsupportedSizeError : public std::length_error {
 public:
  using std::length_error::length_error;
};

// Malformed input file. `line` is 1-based; 0 when not tied to a line.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error(line ? what + " (line " + std::to_string(line) + ")"
                                : what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// A sampler started from a point outside the support of its target.
class InitializationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad configuration or command-line usage.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Filesystem failures (unwritable output directory, missing dataset).
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace gibbscl
