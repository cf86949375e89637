#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace loadcast {

/// Error categories shared by the library, the HTTP API and the CLI.
enum class ErrorCode { not_found, invalid_input, insufficient_data, internal };

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

class InvalidInput : public Error {
public:
    explicit InvalidInput(const std::string& message)
        : Error(ErrorCode::invalid_input, message) {}
};

class NotFound : public Error {
public:
    explicit NotFound(const std::string& message)
        : Error(ErrorCode::not_found, message) {}
};

class InsufficientData : public Error {
public:
    InsufficientData(const std::string& message, std::size_t candidates, std::size_t kept)
        : Error(ErrorCode::insufficient_data, message), candidates_(candidates), kept_(kept) {}

    std::size_t candidates() const noexcept { return candidates_; }
    std::size_t kept() const noexcept { return kept_; }

private:
    std::size_t candidates_;
    std::size_t kept_;
};

/// Raised for CSV rows that cannot be accepted. Rows are numbered from 1,
/// the header line is not counted.
class ParseError : public InvalidInput {
public:
    ParseError(std::size_t row, const std::string& message)
        : InvalidInput("row " + std::to_string(row) + ": " + message), row_(row) {}

    std::size_t row() const noexcept { return row_; }

private:
    std::size_t row_;
};

class UnsupportedFrequency : public InvalidInput {
public:
    using InvalidInput::InvalidInput;
};

class ConfigurationError : public InvalidInput {
public:
    using InvalidInput::InvalidInput;
};

/// A stored document could not be decoded.
class IntegrityError : public Error {
public:
    IntegrityError(const std::string& file, const std::string& message)
        : Error(ErrorCode::internal, file + ": " + message), file_(file) {}

    const std::string& file() const noexcept { return file_; }

private:
    std::string file_;
};

} // namespace loadcast
