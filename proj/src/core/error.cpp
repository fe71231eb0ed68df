#include "canvas/error.hpp"

namespace canvas {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::EmptyTitle: return "EmptyTitle";
    case ErrorCode::CyclicComposition: return "CyclicComposition";
    case ErrorCode::DuplicateDefault: return "DuplicateDefault";
    case ErrorCode::DuplicatePriority: return "DuplicatePriority";
    case ErrorCode::UnknownNode: return "UnknownNode";
    case ErrorCode::InvalidGraph: return "InvalidGraph";
    case ErrorCode::InvalidCondition: return "InvalidCondition";
    case ErrorCode::UnknownComposition: return "UnknownComposition";
    case ErrorCode::ValidationErrorsPresent: return "ValidationErrorsPresent";
    case ErrorCode::SessionNotActive: return "SessionNotActive";
    case ErrorCode::WrongNode: return "WrongNode";
    case ErrorCode::SessionNotFinished: return "SessionNotFinished";
    case ErrorCode::InvalidOutcome: return "InvalidOutcome";
    case ErrorCode::GradeOutOfRange: return "GradeOutOfRange";
    case ErrorCode::UnknownModule: return "UnknownModule";
    case ErrorCode::UnknownUser: return "UnknownUser";
    case ErrorCode::UnrelatedHistories: return "UnrelatedHistories";
    case ErrorCode::NotAnArchive: return "NotAnArchive";
    case ErrorCode::MissingManifest: return "MissingManifest";
    case ErrorCode::MalformedManifest: return "MalformedManifest";
    case ErrorCode::DanglingDependency: return "DanglingDependency";
    case ErrorCode::SemanticsViolation: return "SemanticsViolation";
    case ErrorCode::InvalidPackage: return "InvalidPackage";
    case ErrorCode::ExportBlocked: return "ExportBlocked";
    case ErrorCode::MissingPackage: return "MissingPackage";
    case ErrorCode::LogonIdTaken: return "LogonIdTaken";
    case ErrorCode::WeakPassword: return "WeakPassword";
    case ErrorCode::InvalidCredentials: return "InvalidCredentials";
    case ErrorCode::Unauthorized: return "Unauthorized";
    case ErrorCode::UnknownTemplate: return "UnknownTemplate";
    case ErrorCode::UnresolvedSlot: return "UnresolvedSlot";
    case ErrorCode::UnknownTarget: return "UnknownTarget";
    case ErrorCode::UnknownSession: return "UnknownSession";
    case ErrorCode::UnknownReviewItem: return "UnknownReviewItem";
    case ErrorCode::VersionConflict: return "VersionConflict";
    case ErrorCode::BadRequest: return "BadRequest";
    case ErrorCode::StoreFailure: return "StoreFailure";
  }
  return "Unknown";
}

}  // namespace canvas
