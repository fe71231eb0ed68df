#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace canvas {

enum class ErrorCode {
  // core model
  EmptyTitle,
  CyclicComposition,
  DuplicateDefault,
  DuplicatePriority,
  UnknownNode,
  InvalidGraph,
  // condition language
  InvalidCondition,
  // session runtime
  UnknownComposition,
  ValidationErrorsPresent,
  SessionNotActive,
  WrongNode,
  SessionNotFinished,
  InvalidOutcome,
  // scheduler
  GradeOutOfRange,
  // remix ledger
  UnknownModule,
  UnknownUser,
  UnrelatedHistories,
  // h5p
  NotAnArchive,
  MissingManifest,
  MalformedManifest,
  DanglingDependency,
  SemanticsViolation,
  InvalidPackage,
  ExportBlocked,
  MissingPackage,
  // community service
  LogonIdTaken,
  WeakPassword,
  InvalidCredentials,
  Unauthorized,
  UnknownTemplate,
  UnresolvedSlot,
  UnknownTarget,
  UnknownSession,
  UnknownReviewItem,
  VersionConflict,
  BadRequest,
  StoreFailure,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure the library reports carries one of the codes above so the
/// service layer can map it onto a status without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace canvas
