#pragma once

#include <stdexcept>
#include <string>

namespace tarkit {

/// Runtime failure anywhere in the toolkit. The CLI maps this to exit code 2.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

[[noreturn]] inline void fail(const std::string& message) { throw Error(message); }

}  // namespace tarkit
