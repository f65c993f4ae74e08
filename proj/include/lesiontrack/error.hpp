#pragma once

#include <stdexcept>
#include <string>

namespace lesiontrack {

enum class ErrorKind {
  Parse,
  UVMismatch,
  EmptyMesh,
  EmptyIndex,
  Schema,
  Range,
  MissingConfidence,
  InvalidVertex,
  DisconnectedLesions,
  TemplateSizeMismatch,
  MeshMismatch,
  MissingCorrespondence,
  InfeasibleAssignment,
  EmptyGroundTruth,
  InsufficientSubjects,
  InvalidConfig,
  Io,
};

const char* to_string(ErrorKind kind);

/// Every failure raised by the library carries a kind so callers (and the CLI
/// exit-code mapping) can branch without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

  /// I/O failures map to exit code 2, everything else is a validation failure.
  bool is_io() const noexcept { return kind_ == ErrorKind::Io; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace lesiontrack
