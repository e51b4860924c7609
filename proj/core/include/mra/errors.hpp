#pragma once

#include <stdexcept>
#include <string>

namespace mra {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Field construction / arithmetic.
class FieldError : public Error {
public:
    using Error::Error;
};
class DivisionByZero : public Error {
public:
    using Error::Error;
};

// Linear algebra preconditions.
class DimensionMismatch : public Error {
public:
    using Error::Error;
};

// Scheme parameter validation; message names the violated constraint.
class ConstraintViolation : public Error {
public:
    using Error::Error;
};

class MalformedRule : public Error {
public:
    using Error::Error;
};
class MalformedMessage : public Error {
public:
    using Error::Error;
};
// A derived object failed its classification postcondition; signals an
// invariant breach upstream rather than bad user input.
class TypeCheckFailed : public Error {
public:
    using Error::Error;
};
class SamplingExhausted : public Error {
public:
    using Error::Error;
};

class BudgetExceeded : public Error {
public:
    using Error::Error;
};
class EmptyCoalition : public Error {
public:
    using Error::Error;
};

class SerializationError : public Error {
public:
    using Error::Error;
};

}  // namespace mra
