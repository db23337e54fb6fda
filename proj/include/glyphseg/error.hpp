#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace glyphseg {

enum class ErrorCode {
    InvalidArgument,
    ParseError,
    SchemaError,
    ValidationError,
    IoError,
    InsufficientPeaks,
    FontLoadError,
    MissingGlyph,
    EmptyTemplateSet,
    InsufficientFonts,
    AlignmentFailed,
    RefinementFailed,
    UnknownCategory,
    BackendUnavailable,
    ProtocolError,
    ShapeMismatch,
    EmptyInput,
    MissingPair,
    ConfigError,
};

std::string_view to_string(ErrorCode code);

// Every failure raised by the library carries one of the codes above so
// callers can branch on the kind without a class hierarchy.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace glyphseg
