#pragma once

#include <stdexcept>
#include <string>

namespace vmfdoc {

// Base for all library errors. CLI maps these to exit code 1.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class InvalidArgumentError : public Error {
public:
    using Error::Error;
};

class ZeroNormError : public Error {
public:
    using Error::Error;
};

class DimensionMismatchError : public Error {
public:
    using Error::Error;
};

class DegenerateResultantError : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    explicit ParseError(const std::string& msg) : Error(msg), line_(0) {}
    ParseError(const std::string& msg, std::size_t line)
        : Error(msg + " (line " + std::to_string(line) + ")"), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

class EmptyCorpusError : public Error {
public:
    using Error::Error;
};

class EmptyDocumentError : public Error {
public:
    using Error::Error;
};

class SingleClassError : public Error {
public:
    using Error::Error;
};

class TooFewExamplesError : public Error {
public:
    using Error::Error;
};

class LengthMismatchError : public Error {
public:
    using Error::Error;
};

class FingerprintMismatchError : public Error {
public:
    using Error::Error;
};

} // namespace vmfdoc
