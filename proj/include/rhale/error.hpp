#pragma once

#include <stdexcept>
#include <string>

namespace rhale {

// Base of every error raised by the library. Each one traces back to the inputs,
// so the CLI exits with 2 for all of them except InfeasibleError (3); exceptions
// from outside this hierarchy exit with 4.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed or out-of-contract arguments (dimension mismatch, out-of-range
// values, non-refining partitions, unreadable files).
class InputError : public Error {
public:
    using Error::Error;
};

// The model produced a non-finite value.
class ModelError : public Error {
public:
    using Error::Error;
};

// The requested operation needs something the inputs do not provide
// (a missing gradient, an enumeration too large to run, an uncovered example).
class CapabilityError : public Error {
public:
    using Error::Error;
};

// No partition satisfies the per-bin population constraint.
class InfeasibleError : public Error {
public:
    using Error::Error;
};

class EmptyBinError : public Error {
public:
    using Error::Error;
};

// A bin holds fewer than two points, so its sample deviation is undefined.
class DegenerateBinError : public Error {
public:
    using Error::Error;
};

}  // namespace rhale
