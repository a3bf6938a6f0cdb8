#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pulsealarm {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

// Ordering violation inside a sample or event stream.
class StreamError : public Error {
public:
    StreamError(std::size_t index, const std::string& what)
        : Error("stream error at index " + std::to_string(index) + ": " + what), index_(index) {}

    std::size_t index() const noexcept { return index_; }

private:
    std::size_t index_;
};

// Invalid WaveformSpec (or other spec struct); carries the offending field.
class SpecError : public Error {
public:
    SpecError(std::string field, const std::string& what)
        : Error("invalid " + field + ": " + what), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class StateError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class ScenarioError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace pulsealarm
