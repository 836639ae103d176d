#pragma once

#include <stdexcept>
#include <string>

namespace kdg {

// Base for every error the library raises.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Mismatched dimensions or lengths between arguments.
class ShapeError : public Error {
public:
    using Error::Error;
};

// An argument outside its documented domain (bad config values, wrong
// image/k-space tag, out-of-range epoch, ...).
class ArgumentError : public Error {
public:
    using Error::Error;
};

// A non-finite k-space coordinate; carries the offending sample index.
class NonFiniteCoordinate : public Error {
public:
    explicit NonFiniteCoordinate(std::size_t index)
        : Error("non-finite k-space coordinate at index " + std::to_string(index)), index_(index) {}
    std::size_t index() const noexcept { return index_; }

private:
    std::size_t index_;
};

// Training produced a NaN/Inf loss.
class NumericAbort : public Error {
public:
    using Error::Error;
};

}  // namespace kdg
