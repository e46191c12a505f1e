#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace histcad {

enum class ErrorCode {
    SyntaxError,
    SchemaError,
    DuplicateId,
    OpenLoop,
    UnsupportedCurve,
    DegenerateSegment,
    NonMinimalOperands,
    AmbiguousTopology,
    DegenerateModel,
    UndefinedResidual,
    SelfIntersectingProfile,
    DegenerateDirection,
    ProfileCrossesAxis,
    ExecutionFailed,
    EmptySet,
    TransportError,
    EmptyResponse,
    NoInputs,
    InvalidArgument,
};

/// Stable machine-readable name, e.g. "OPEN_LOOP".
std::string_view error_code_name(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

/// Parse failure with a source location. `line`/`column` are 1-based and
/// zero when unknown; `path` is the JSON-pointer-like field path for schema
/// errors.
class ParseError : public Error {
public:
    ParseError(ErrorCode code, const std::string& message, std::size_t line, std::size_t column,
               std::string path = {})
        : Error(code, describe(message, line, column, path)),
          line_(line),
          column_(column),
          path_(std::move(path)) {}

    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }
    const std::string& path() const noexcept { return path_; }

private:
    static std::string describe(const std::string& message, std::size_t line, std::size_t column,
                                const std::string& path) {
        std::string out = message;
        if (line > 0) {
            out += " at line " + std::to_string(line) + ", column " + std::to_string(column);
        }
        if (!path.empty()) {
            out += " (field " + path + ")";
        }
        return out;
    }

    std::size_t line_;
    std::size_t column_;
    std::string path_;
};

}  // namespace histcad
