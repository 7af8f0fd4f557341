#pragma once

#include <stdexcept>
#include <string>

namespace relight {

/// Invalid data: malformed files, inconsistent dimensions, violated invariants.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

/// Invalid invocation: bad flags or conflicting options.
class UsageError : public std::runtime_error {
 public:
  explicit UsageError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace relight
