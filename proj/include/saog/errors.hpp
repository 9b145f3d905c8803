#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace saog {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A GrammarSpec, ParseGraph or configuration violates its invariants.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// A label, size, configuration or relation type does not resolve against the spec.
class UnknownSymbolError : public Error {
public:
    using Error::Error;
};

class BehindCameraError : public Error {
public:
    using Error::Error;
};

/// Malformed binary or text input. `offset()` is the byte position of the problem.
class FormatError : public Error {
public:
    FormatError(const std::string& what, std::size_t offset)
        : Error(what + " (at byte " + std::to_string(offset) + ")"), offset_(offset) {}
    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

class OverflowError : public Error {
public:
    using Error::Error;
};

/// Dataset coordinates disagree with the relation annotations.
class ConventionError : public Error {
public:
    using Error::Error;
};

} // namespace saog
