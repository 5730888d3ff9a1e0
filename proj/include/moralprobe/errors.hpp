#pragma once

#include <stdexcept>
#include <string>

namespace moralprobe {

// Broad failure classes. Each maps onto one CLI exit code.
enum class ErrorKind {
    usage,        // bad flags or config
    data,         // schema, mapping, parse and aggregation problems in inputs
    numeric,      // non-finite values, out-of-domain special-function arguments
    domain,       // precondition violations in library calls
    scorer,       // transport failures and cache misses
};

class Error : public std::runtime_error {
  public:
    Error(ErrorKind kind, const std::string &what) : std::runtime_error(what), kind_{kind} {}
    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

  private:
    ErrorKind kind_;
};

struct ConfigError : Error {
    explicit ConfigError(const std::string &what) : Error(ErrorKind::usage, what) {}
};

struct SchemaError : Error {
    explicit SchemaError(const std::string &what) : Error(ErrorKind::data, what) {}
};

struct MappingError : Error {
    explicit MappingError(const std::string &what) : Error(ErrorKind::data, what) {}
};

struct DataError : Error {
    explicit DataError(const std::string &what) : Error(ErrorKind::data, what) {}
};

struct NumericError : Error {
    explicit NumericError(const std::string &what) : Error(ErrorKind::numeric, what) {}
};

struct DomainError : Error {
    explicit DomainError(const std::string &what) : Error(ErrorKind::domain, what) {}
};

struct TemplateError : Error {
    explicit TemplateError(const std::string &what) : Error(ErrorKind::domain, what) {}
};

class TransportError : public Error {
  public:
    TransportError(const std::string &what, int attempts)
        : Error(ErrorKind::scorer, what), attempts_{attempts} {}
    [[nodiscard]] int attempts() const noexcept { return attempts_; }

  private:
    int attempts_;
};

struct MissingScoreError : Error {
    explicit MissingScoreError(const std::string &what) : Error(ErrorKind::scorer, what) {}
};

// Exit codes of the command-line front end.
enum class ExitCode : int {
    ok = 0,
    usage = 1,
    data = 2,
    scorer = 3,
    partial_coverage = 4,
};

inline ExitCode exit_code_for(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::usage:
        return ExitCode::usage;
    case ErrorKind::scorer:
        return ExitCode::scorer;
    case ErrorKind::data:
    case ErrorKind::numeric:
    case ErrorKind::domain:
        return ExitCode::data;
    }
    return ExitCode::data;
}

} // namespace moralprobe
