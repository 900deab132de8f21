#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace geoaudit {

enum class ErrorCode {
  MalformedAddress,
  MalformedPrefix,
  InvertedRange,
  MixedFamily,
  UnknownCountry,
  UnknownRir,
  FamilyMismatch,
  TrieFrozen,
  UnreadableStream,
  UnknownDialect,
  MalformedConfig,
  BackendUnavailable,
  ReplayMiss,
  UnknownTarget,
  NoResponses,
  NegativeRtt,
  EmptyGeoSet,
};

std::string_view to_string(ErrorCode code);

// Every failure raised by the library carries one of the codes above so
// callers can map it to an exit status without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace geoaudit
