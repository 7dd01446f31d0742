#include "mmcm/error.hpp"

namespace mmcm {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::UnknownDtype: return "UnknownDtype";
    case ErrorCode::DtypeMismatch: return "DtypeMismatch";
    case ErrorCode::TruncatedPayload: return "TruncatedPayload";
    case ErrorCode::OversizedPayload: return "OversizedPayload";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::OutOfRangeConfidence: return "OutOfRangeConfidence";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::TooFewModels: return "TooFewModels";
    case ErrorCode::InvalidBinCount: return "InvalidBinCount";
    case ErrorCode::InvalidTau: return "InvalidTau";
    case ErrorCode::OutOfRangeMean: return "OutOfRangeMean";
    case ErrorCode::EmptyGroup: return "EmptyGroup";
    case ErrorCode::DegenerateX: return "DegenerateX";
    case ErrorCode::TooFewPoints: return "TooFewPoints";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::SchemaViolation: return "SchemaViolation";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::ModelCountMismatch: return "ModelCountMismatch";
    case ErrorCode::UnrealizableAgreement: return "UnrealizableAgreement";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::UnknownDataset: return "UnknownDataset";
  }
  return "Unknown";
}

void fail(ErrorCode code, const std::string& what) {
  throw Error(code, std::string(to_string(code)) + ": " + what);
}

}  // namespace mmcm
