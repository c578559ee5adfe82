#pragma once

#include <stdexcept>
#include <string>

namespace mpct {

/// Failure categories, mirrored one-to-one by the C API status codes.
enum class ErrorCode {
  invalid_argument,     ///< contract violation (dimensions, ranges, missing fields)
  parse,                ///< malformed JSON / config file
  singular,             ///< singular denominator or non-invertible system
  numeric,              ///< non-finite values produced by a computation
  assumption_violation, ///< rank conditions of the splitting do not hold
  conditioning,         ///< a required factorization failed
  divergence,           ///< solver iterates became non-finite
  io,                   ///< file read/write failure
};

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

} // namespace mpct
