#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <variant>

namespace psfm {

enum class ErrorCode {
  // Input violates a documented precondition (too few samples, bad sizes).
  kInvalidArgument,
  // Geometry is degenerate (parallel rays, collinear/coplanar sets).
  kDegenerate,
  // Points end up behind at least one camera.
  kCheirality,
  // Robust estimation found no acceptable consensus.
  kNoConsensus,
};

const char* ErrorCodeName(ErrorCode code);

struct Error {
  ErrorCode code;
  std::string message;
};

// Value-or-error return used by estimators whose failure is an expected
// outcome rather than a programming error.
template <typename T>
class Expected {
 public:
  Expected(T value) : storage_(std::move(value)) {}  // NOLINT
  Expected(Error error) : storage_(std::move(error)) {}  // NOLINT

  bool ok() const { return std::holds_alternative<T>(storage_); }
  explicit operator bool() const { return ok(); }

  const T& value() const& {
    if (!ok()) {
      throw std::logic_error("Expected::value() on error: " +
                             error().message);
    }
    return std::get<T>(storage_);
  }
  T& value() & {
    if (!ok()) {
      throw std::logic_error("Expected::value() on error: " +
                             error().message);
    }
    return std::get<T>(storage_);
  }
  T&& value() && { return std::move(value()); }

  const T& operator*() const& { return value(); }
  T& operator*() & { return value(); }
  const T* operator->() const { return &value(); }
  T* operator->() { return &value(); }

  const Error& error() const { return std::get<Error>(storage_); }

 private:
  std::variant<T, Error> storage_;
};

inline Error MakeError(ErrorCode code, std::string message) {
  return Error{code, std::move(message)};
}

}  // namespace psfm
