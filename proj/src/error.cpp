#include "gapf/error.hpp"

namespace gapf {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kEmptyMesh: return "EmptyMesh";
    case ErrorCode::kMeshLoad: return "MeshLoad";
    case ErrorCode::kInsufficientSupport: return "InsufficientSupport";
    case ErrorCode::kEmptyCorrespondences: return "EmptyCorrespondences";
    case ErrorCode::kNoMatches: return "NoMatches";
    case ErrorCode::kEmptyObservation: return "EmptyObservation";
    case ErrorCode::kConfig: return "Config";
    case ErrorCode::kScenario: return "Scenario";
    case ErrorCode::kIo: return "Io";
  }
  return "Unknown";
}

}  // namespace gapf
