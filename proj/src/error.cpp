#include "lesiontrack/error.hpp"

namespace lesiontrack {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Parse: return "ParseError";
    case ErrorKind::UVMismatch: return "UVMismatch";
    case ErrorKind::EmptyMesh: return "EmptyMesh";
    case ErrorKind::EmptyIndex: return "EmptyIndex";
    case ErrorKind::Schema: return "SchemaError";
    case ErrorKind::Range: return "RangeError";
    case ErrorKind::MissingConfidence: return "MissingConfidence";
    case ErrorKind::InvalidVertex: return "InvalidVertex";
    case ErrorKind::DisconnectedLesions: return "DisconnectedLesions";
    case ErrorKind::TemplateSizeMismatch: return "TemplateSizeMismatch";
    case ErrorKind::MeshMismatch: return "MeshMismatch";
    case ErrorKind::MissingCorrespondence: return "MissingCorrespondence";
    case ErrorKind::InfeasibleAssignment: return "InfeasibleAssignment";
    case ErrorKind::EmptyGroundTruth: return "EmptyGroundTruth";
    case ErrorKind::InsufficientSubjects: return "InsufficientSubjects";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
    case ErrorKind::Io: return "IOError";
  }
  return "Error";
}

}  // namespace lesiontrack
