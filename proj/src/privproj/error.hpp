#pragma once

#include <stdexcept>
#include <string>

namespace privproj {

enum class ErrorCode {
  InvalidArgument,
  NotPositiveDefinite,
  NoConvergence,
  InvalidK,
  LengthMismatch,
  EmptyClass,
  WeightMismatch,
  RankDeficient,
  DimensionMismatch,
  EmptyTrainClass,
  ParseError,
  UnknownCategory,
  IoError,
  ConfigError,
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
  throw Error(code, std::string(to_string(code)) + ": " + what);
}

}  // namespace privproj
