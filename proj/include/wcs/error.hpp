#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace wcs {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input bytes. Carries the file name and byte offset of the fault.
class ParseError : public Error {
 public:
  ParseError(std::string file, std::size_t offset, const std::string& what)
      : Error(file + ":" + std::to_string(offset) + ": " + what),
        file_(std::move(file)),
        offset_(offset) {}

  const std::string& file() const noexcept { return file_; }
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::string file_;
  std::size_t offset_;
};

/// Well-formed input that violates a domain invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Numeric failure in weight fitting (degenerate design, KKT not reached).
class FitError : public Error {
 public:
  using Error::Error;
};

/// Correlation undefined (constant column, too few samples).
class StatsError : public Error {
 public:
  using Error::Error;
};

/// Invalid scene script or inapplicable injection.
class ScriptError : public Error {
 public:
  using Error::Error;
};

}  // namespace wcs
