#pragma once

#include <stdexcept>
#include <string>

namespace asaukit {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller violated an operation's precondition (bad argument values).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Tensor or layer shapes do not compose.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// A forward cache does not belong to the network (or parameter state) it is used with.
class StaleCacheError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Malformed file content (checkpoints, data containers, CSV).
class FormatError : public Error {
 public:
  using Error::Error;
};

class IdxError : public Error {
 public:
  enum class Kind { bad_magic, truncated, count_mismatch };

  IdxError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}

  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

}  // namespace asaukit
