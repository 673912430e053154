#pragma once

#include <stdexcept>
#include <string>

namespace mtkit {

/// Raised when caller-supplied data or parameters violate a precondition.
class InputError : public std::invalid_argument {
 public:
  explicit InputError(const std::string& what) : std::invalid_argument(what) {}
};

/// Raised when a procedure is combined with a model or metric it cannot serve
/// (e.g. directional metrics requested without signed statistics).
class IncompatibleError : public std::invalid_argument {
 public:
  explicit IncompatibleError(const std::string& what) : std::invalid_argument(what) {}
};

}  // namespace mtkit
