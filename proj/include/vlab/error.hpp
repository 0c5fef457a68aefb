#pragma once

#include <stdexcept>
#include <string>

namespace vlab {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Problems with input data files and series (bad rows, missing columns, ...).
class DataError : public Error {
public:
    enum class Kind {
        missing_file,
        missing_column,
        too_few_rows,
        bad_date,
        bad_value,
        duplicate_date,
        nonpositive_price,
        invalid_argument,
    };

    DataError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}

    [[nodiscard]] Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

/// A model quantity left its valid domain (non-positive variance, non-finite loss, ...).
class NumericError : public Error {
public:
    using Error::Error;
};

/// Caller violated a documented precondition.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

}  // namespace vlab
