#pragma once

#include <stdexcept>
#include <string>

namespace rewritekit {

enum class ErrorKind {
    InvalidArgument,
    DegenerateInput,
    Validation,
    Config,
    Template,
    BackendUnavailable,
    ServerUnavailable,
    Protocol,
    ScorerUnavailable,
    Classification,
    InfeasibleBudget,
    Io,
};

const char* error_kind_name(ErrorKind kind);

/// Single exception type for the whole library; `kind()` tells callers
/// which contract was violated without a class per failure mode.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(error_kind_name(kind)) + ": " + message),
          kind_(kind) {}

    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

namespace errors {

inline Error invalid_argument(const std::string& m) { return Error(ErrorKind::InvalidArgument, m); }
inline Error degenerate_input(const std::string& m) { return Error(ErrorKind::DegenerateInput, m); }
inline Error validation(const std::string& m) { return Error(ErrorKind::Validation, m); }
inline Error config(const std::string& m) { return Error(ErrorKind::Config, m); }
inline Error template_error(const std::string& m) { return Error(ErrorKind::Template, m); }
inline Error backend_unavailable(const std::string& m) { return Error(ErrorKind::BackendUnavailable, m); }
inline Error server_unavailable(const std::string& m) { return Error(ErrorKind::ServerUnavailable, m); }
inline Error protocol(const std::string& m) { return Error(ErrorKind::Protocol, m); }
inline Error scorer_unavailable(const std::string& m) { return Error(ErrorKind::ScorerUnavailable, m); }
inline Error classification(const std::string& m) { return Error(ErrorKind::Classification, m); }
inline Error infeasible_budget(const std::string& m) { return Error(ErrorKind::InfeasibleBudget, m); }
inline Error io(const std::string& m) { return Error(ErrorKind::Io, m); }

}  // namespace errors
}  // namespace rewritekit
