#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lsdr {

enum class ErrorKind {
    DimensionMismatch,
    NonCanonical,
    NonFinite,
    NegativeThreshold,
    SvdFailure,
    InvalidConfig,
    DegenerateDimension,
    NonConvergence,
    ZeroTruth,
    ZeroMatrix,
    MalformedLine,
    MissingHeader,
    UnknownNode,
    InvalidFlag,
    IoFailure,
    MissingInput,
    OracleNeedsTruth,
};

std::string_view to_string(ErrorKind kind);

// Single exception type for the library; callers branch on kind().
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

// Malformed CSV input; line() is 1-based and counts the header.
class MalformedLineError : public Error {
public:
    MalformedLineError(std::size_t line, const std::string& message)
        : Error(ErrorKind::MalformedLine, "line " + std::to_string(line) + ": " + message),
          line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

}  // namespace lsdr
