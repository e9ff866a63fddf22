#pragma once

#include <stdexcept>
#include <string>

namespace lagdyn {

/// Base for all library errors. `kind()` maps onto the CLI exit codes.
class Error : public std::runtime_error {
public:
    enum class Kind { usage = 1, data = 2, numerical = 3 };

    Error(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

/// Invalid arguments, incompatible shapes, bad flags.
class UsageError : public Error {
public:
    explicit UsageError(const std::string& what) : Error(Kind::usage, what) {}
};

/// Malformed or incompatible files and datasets.
class DataError : public Error {
public:
    explicit DataError(const std::string& what) : Error(Kind::data, what) {}
};

/// Failed factorizations, diverged rollouts, non-finite values.
class NumericalError : public Error {
public:
    explicit NumericalError(const std::string& what) : Error(Kind::numerical, what) {}
};

} // namespace lagdyn
