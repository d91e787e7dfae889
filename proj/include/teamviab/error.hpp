#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace teamviab {

// Input data violates a documented format or invariant. Carries the file and
// 1-based line number when the problem can be pinned to one.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}

  ValidationError(std::string file, std::size_t line, const std::string& what)
      : std::runtime_error(file + ":" + std::to_string(line) + ": " + what),
        file_(std::move(file)),
        line_(line) {}

  const std::string& file() const noexcept { return file_; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::string file_;
  std::size_t line_ = 0;
};

// The data is well-formed but the requested analysis cannot run on it
// (single-class split, empty window, class smaller than fold count, ...).
class DegenerateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace teamviab
