#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mmcm {

enum class ErrorCode {
  BadMagic,
  UnknownDtype,
  DtypeMismatch,
  TruncatedPayload,
  OversizedPayload,
  NonFiniteValue,
  OutOfRangeConfidence,
  IoFailure,
  DimensionMismatch,
  TooFewModels,
  InvalidBinCount,
  InvalidTau,
  OutOfRangeMean,
  EmptyGroup,
  DegenerateX,
  TooFewPoints,
  ParseError,
  SchemaViolation,
  DuplicateId,
  ModelCountMismatch,
  UnrealizableAgreement,
  InvalidSpec,
  UnknownDataset,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the codes above so
/// callers (and the CLI's exit-code mapping) can branch without parsing text.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& what);

}  // namespace mmcm
