#ifndef PARTGIBBS_ERRORS_HPP
#define PARTGIBBS_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace partgibbs {

// Invalid parameters or arguments outside an operation's domain.
class ValidationError : public std::invalid_argument {
 public:
  explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

// A table, truncation horizon, enumeration or rejection budget was exceeded.
class ResourceError : public std::runtime_error {
 public:
  explicit ResourceError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace partgibbs

#endif  // PARTGIBBS_ERRORS_HPP
