#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cardbound {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

// A relation with no pairs; moments and logs are undefined on it.
class EmptyRelation : public Error {
public:
    EmptyRelation() : Error("relation is empty") {}
};

class DomainError : public Error {
public:
    using Error::Error;
};

// A configured work budget (enumeration size, matrix size, node visits) was exceeded.
class ResourceError : public Error {
public:
    using Error::Error;
};

class LookupError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace cardbound
