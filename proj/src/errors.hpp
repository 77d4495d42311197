#pragma once

#include <stdexcept>
#include <string>

namespace rsc {

// Error categories mirror the failure modes the estimators and the C API
// need to distinguish; everything else is carried in the message.
enum class errc {
  invalid_argument,  // malformed parameters, specs, config keys
  invalid_input,     // data violates an operation's preconditions
  singular,          // matrix not invertible at the working tolerance
  degenerate,        // iteration left the PD cone / denominator collapsed
  domain,            // value outside the mathematical domain
  io,                // file read/write problems
  numeric,           // overflow, non-finite intermediate
};

class Error : public std::runtime_error {
 public:
  Error(errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  errc code() const { return code_; }

 private:
  errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace rsc
