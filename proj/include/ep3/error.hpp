#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ep3 {

enum class ErrorCode {
  InvalidInput,
  LengthMismatch,
  NonConvergence,
  Singular,
  AmbiguousStructure,
  ChainBreaks,
  DegenerateNormalization,
  InconsistentCycles,
  EPOnPath,
  MatchingAmbiguous,
  NoConvergence,
  WrongOrder,
  DimensionMismatch,
  NonSymmetricFile,
};

std::string_view to_string(ErrorCode code);

/// Every failure surfaced by the library. The code is stable and is what the
/// CLI reports in its error JSON.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline void require(bool condition, ErrorCode code, const std::string& what) {
  if (!condition) throw Error(code, what);
}

}  // namespace ep3
