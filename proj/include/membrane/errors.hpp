#pragma once

#include <stdexcept>
#include <string>

namespace membrane {

/// Bad user input: wrong sizes, invalid parameters, grid mismatches.
class invalid_argument : public std::invalid_argument {
 public:
  explicit invalid_argument(const std::string& what) : std::invalid_argument(what) {}
};

/// Grid/horizon too coarse for the requested accuracy.
class resolution_error : public invalid_argument {
 public:
  explicit resolution_error(const std::string& what) : invalid_argument(what) {}
};

/// An iteration failed to converge or produced non-finite values.
class numeric_failure : public std::runtime_error {
 public:
  explicit numeric_failure(const std::string& what) : std::runtime_error(what) {}
};

inline void require(bool cond, const std::string& what) {
  if (!cond) throw invalid_argument(what);
}

}  // namespace membrane
