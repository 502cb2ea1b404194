#pragma once

#include <stdexcept>
#include <string>

namespace abcpet {

// Numeric values mirror abcpet_status in abcpet.h.
enum class ErrorCode : int {
  Ok = 0,
  InvalidArgument = 1,
  FormatError = 2,
  IOError = 3,
  SingularStep = 4,
  NegativeActivity = 5,
  DegenerateFit = 6,
  KindMismatch = 7,
  MissingContext = 8,
  RankDeficient = 9,
  NoValidFit = 10,
  EmptyPosterior = 11,
  GridMismatch = 12,
};

const char* to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace abcpet
