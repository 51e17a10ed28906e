#pragma once

#include <stdexcept>
#include <string>

namespace spdc {

// Base for every error raised by the library. The CLI maps the concrete
// type onto its exit code.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Input outside a model's validity range (e.g. wavelength outside the
// Sellmeier fit range).
class RangeError : public Error {
public:
    using Error::Error;
};

// Argument violates a mathematical precondition (non-positive length,
// efficiency outside [0,1], ...).
class DomainError : public Error {
public:
    using Error::Error;
};

// Measured data inconsistent with the model (negative dark-corrected rate).
class DataQualityError : public Error {
public:
    using Error::Error;
};

// Solver or fit failure.
class NumericalError : public Error {
public:
    using Error::Error;
};

// Malformed or incomplete configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace spdc
