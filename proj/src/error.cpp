#include "glyphseg/error.hpp"

namespace glyphseg {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::SchemaError: return "SchemaError";
        case ErrorCode::ValidationError: return "ValidationError";
        case ErrorCode::IoError: return "IoError";
        case ErrorCode::InsufficientPeaks: return "InsufficientPeaks";
        case ErrorCode::FontLoadError: return "FontLoadError";
        case ErrorCode::MissingGlyph: return "MissingGlyph";
        case ErrorCode::EmptyTemplateSet: return "EmptyTemplateSet";
        case ErrorCode::InsufficientFonts: return "InsufficientFonts";
        case ErrorCode::AlignmentFailed: return "AlignmentFailed";
        case ErrorCode::RefinementFailed: return "RefinementFailed";
        case ErrorCode::UnknownCategory: return "UnknownCategory";
        case ErrorCode::BackendUnavailable: return "BackendUnavailable";
        case ErrorCode::ProtocolError: return "ProtocolError";
        case ErrorCode::ShapeMismatch: return "ShapeMismatch";
        case ErrorCode::EmptyInput: return "EmptyInput";
        case ErrorCode::MissingPair: return "MissingPair";
        case ErrorCode::ConfigError: return "ConfigError";
    }
    return "Unknown";
}

}  // namespace glyphseg
