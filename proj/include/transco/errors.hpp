#pragma once

#include <stdexcept>
#include <string>

namespace transco {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidParameter : public Error {
public:
    using Error::Error;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

/// Design matrix without full column rank.
class SingularDesign : public Error {
public:
    SingularDesign(const std::string& what, long rank, long cols)
        : Error(what), rank_(rank), cols_(cols) {}
    long rank() const noexcept { return rank_; }
    long cols() const noexcept { return cols_; }

private:
    long rank_;
    long cols_;
};

/// Source ensemble or Z = X B with (nearly) dependent columns.
class Degeneracy : public Error {
public:
    using Error::Error;
};

class NumericalFailure : public Error {
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

}  // namespace transco
