#include "psfm/util/expected.h"

namespace psfm {

const char* ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument:
      return "invalid_argument";
    case ErrorCode::kDegenerate:
      return "degenerate";
    case ErrorCode::kCheirality:
      return "cheirality";
    case ErrorCode::kNoConsensus:
      return "no_consensus";
  }
  return "unknown";
}

}  // namespace psfm
