#pragma once

#include <stdexcept>
#include <string>

namespace fsum {

// Error taxonomy mirrored by the CLI exit codes: config -> 2, backend -> 3,
// data -> 4.
enum class ErrorKind { Config = 2, Backend = 3, Data = 4 };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorKind::Config, what) {}
};

class BackendError : public Error {
 public:
  explicit BackendError(const std::string& what) : Error(ErrorKind::Backend, what) {}
};

// Raised when a backend cannot provide a required capability, e.g. asking a
// provider without token log-likelihoods for an entropy estimate.
class CapabilityError : public BackendError {
 public:
  explicit CapabilityError(const std::string& what) : BackendError(what) {}
};

class MalformedResponseError : public BackendError {
 public:
  MalformedResponseError(const std::string& what, std::string raw_reply = {})
      : BackendError(what), raw_reply_(std::move(raw_reply)) {}
  const std::string& raw_reply() const noexcept { return raw_reply_; }

 private:
  std::string raw_reply_;
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(ErrorKind::Data, what) {}
};

class DimensionError : public DataError {
 public:
  explicit DimensionError(const std::string& what) : DataError(what) {}
};

class BoundsError : public DataError {
 public:
  explicit BoundsError(const std::string& what) : DataError(what) {}
};

class ShapeError : public DataError {
 public:
  explicit ShapeError(const std::string& what) : DataError(what) {}
};

class DegenerateInputError : public DataError {
 public:
  explicit DegenerateInputError(const std::string& what) : DataError(what) {}
};

// A correlation over a constant series has no defined value.
class UndefinedCorrelationError : public DegenerateInputError {
 public:
  explicit UndefinedCorrelationError(const std::string& what)
      : DegenerateInputError(what) {}
};

class AlignmentError : public DataError {
 public:
  explicit AlignmentError(const std::string& what) : DataError(what) {}
};

class CoverageError : public DataError {
 public:
  explicit CoverageError(const std::string& what) : DataError(what) {}
};

inline int exit_code_for(const Error& e) { return static_cast<int>(e.kind()); }

}  // namespace fsum
