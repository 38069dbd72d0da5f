#pragma once

#include <stdexcept>
#include <string>

namespace lark {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A document could not be parsed; `field()` names the offending key path.
class ParseError : public Error {
public:
    ParseError(std::string field, const std::string& what)
        : Error("parse error at '" + field + "': " + what), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

class ValidationError : public Error {
public:
    using Error::Error;
};

}  // namespace lark
