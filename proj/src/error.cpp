#include "scesame/error.hpp"

namespace scesame {

const char* to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::MalformedInput: return "malformed-input";
        case ErrorKind::EmptyMask: return "empty-mask";
        case ErrorKind::Parameter: return "parameter";
        case ErrorKind::Shape: return "shape";
        case ErrorKind::InvalidAffinity: return "invalid-affinity";
        case ErrorKind::Assignment: return "assignment";
        case ErrorKind::EmptySelection: return "empty-selection";
        case ErrorKind::TooFewMasks: return "too-few-masks";
        case ErrorKind::EmptyDataset: return "empty-dataset";
        case ErrorKind::Numeric: return "numeric";
        case ErrorKind::Io: return "io";
    }
    return "unknown";
}

}  // namespace scesame
