#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace pht {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or out-of-contract input data (shape, NaN, bad labels).
class InvalidInput : public Error {
public:
    using Error::Error;
};

/// Too few observations for the requested leave-out construction.
class InsufficientSample : public InvalidInput {
public:
    using InvalidInput::InvalidInput;
};

/// A delimited-text file that could not be parsed.
class ParseError : public InvalidInput {
public:
    ParseError(std::string message, std::size_t line)
        : InvalidInput(std::move(message)), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// An invalid configuration field (simulation config, tau-selection config).
class ConfigError : public Error {
public:
    ConfigError(const std::string& field, const std::string& message)
        : Error("config field '" + field + "': " + message), field_(field) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// Where a singular covariance block was met. Indices are 0-based;
/// `j == i` marks a single-coordinate (variance) block.
struct BlockLocation {
    std::size_t i = 0;
    std::size_t j = 0;
    std::optional<std::size_t> s;
    std::optional<std::size_t> t;
    std::string term;
};

/// Numerically singular 2x2 (or 1x1) covariance block.
class SingularBlock : public Error {
public:
    explicit SingularBlock(BlockLocation where);
    const BlockLocation& where() const noexcept { return where_; }

private:
    BlockLocation where_;
};

/// The variance estimate needed to standardize a statistic is not positive,
/// or a coordinate has zero variance.
class DegenerateVariance : public Error {
public:
    using Error::Error;
};

}  // namespace pht
