#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cartamr {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NonDivisibleExtent : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class AlignmentError : public Error {
 public:
  using Error::Error;
};

class NonPositiveRemoval : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class NonSPD : public Error {
 public:
  using Error::Error;
};

class DegenerateFissionSource : public Error {
 public:
  using Error::Error;
};

class ZeroFissionNorm : public Error {
 public:
  using Error::Error;
};

class MaxIterationsExceeded : public Error {
 public:
  using Error::Error;
};

class SingularLocalSystem : public Error {
 public:
  using Error::Error;
};

class NoProgress : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Parse failure with the offending line (1-based, 0 when unknown) and a
/// dotted path to the field that could not be read.
class ParseError : public Error {
 public:
  ParseError(std::string source, std::size_t line, std::string field, const std::string& what)
      : Error(source + (line > 0 ? ":" + std::to_string(line) : std::string()) +
              (field.empty() ? std::string() : " [" + field + "]") + ": " + what),
        source_(std::move(source)),
        line_(line),
        field_(std::move(field)) {}

  const std::string& source() const { return source_; }
  std::size_t line() const { return line_; }
  const std::string& field() const { return field_; }

 private:
  std::string source_;
  std::size_t line_;
  std::string field_;
};

}  // namespace cartamr
