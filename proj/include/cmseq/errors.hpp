#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace cmseq {

enum class ErrorCode {
  kDomain,               // symbol index or position out of range
  kRefused,              // enumeration / subset guard exceeded
  kNullEvent,            // conditioning on a zero-probability event
  kPrecondition,         // operation called on an input of the wrong shape
  kUnsupportedTopology,  // equality set outside the tractable classes
  kEmptyLanguage,
  kAlphabetMismatch,
  kParse,
  kNoParse,
  kDisconnected,
  kInternal,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(detail), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

// Largest |A|^n the brute-force oracles are willing to enumerate.
inline constexpr std::uint64_t kDefaultEnumerationLimit = 10'000'000;

}  // namespace cmseq
