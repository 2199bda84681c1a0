#pragma once

#include <stdexcept>
#include <string>

namespace ipnv {

// Every failure raised by the library derives from Error. The CLI maps
// ValidationError to exit code 1 and IoError to exit code 2.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Input outside the mathematical domain of an operation (e.g. e >= 1).
class DomainError : public Error {
public:
    using Error::Error;
};

// Query outside the span covered by a table.
class RangeError : public Error {
public:
    using Error::Error;
};

// Malformed or inconsistent data. `where` is a JSON path, a file name, or
// an entity id, depending on the source.
class ValidationError : public Error {
public:
    ValidationError(std::string where, const std::string& what)
        : Error(where.empty() ? what : where + ": " + what), where_(std::move(where))
    {
    }

    const std::string& where() const noexcept { return where_; }

private:
    std::string where_;
};

class IoError : public Error {
public:
    using Error::Error;
};

} // namespace ipnv
