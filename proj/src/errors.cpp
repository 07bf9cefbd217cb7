#include "rewritekit/errors.hpp"

namespace rewritekit {

const char* error_kind_name(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::InvalidArgument: return "invalid-argument";
        case ErrorKind::DegenerateInput: return "degenerate-input";
        case ErrorKind::Validation: return "validation";
        case ErrorKind::Config: return "config";
        case ErrorKind::Template: return "template";
        case ErrorKind::BackendUnavailable: return "backend-unavailable";
        case ErrorKind::ServerUnavailable: return "server-unavailable";
        case ErrorKind::Protocol: return "protocol";
        case ErrorKind::ScorerUnavailable: return "scorer-unavailable";
        case ErrorKind::Classification: return "classification";
        case ErrorKind::InfeasibleBudget: return "infeasible-budget";
        case ErrorKind::Io: return "io";
    }
    return "unknown";
}

}  // namespace rewritekit
