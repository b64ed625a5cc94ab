#pragma once

#include <stdexcept>
#include <string>

namespace attn {

// Exception hierarchy used throughout the core. The C API maps each kind to
// an attn_status code; nothing else crosses the library boundary.

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tensor extents disagree with what an operator requires.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Caller violated a precondition (bad argument, wrong variant, bad config).
class UsageError : public Error {
 public:
  using Error::Error;
};

/// A file could not be opened, read or written.
class IoError : public Error {
 public:
  IoError(const std::string& path, const std::string& what)
      : Error(path + ": " + what), path_(path) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

/// A file was readable but its contents are malformed.
class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace attn
