#pragma once

#include <stdexcept>
#include <string>

namespace fairdiv {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed serialized input (JSON, rational strings, trace lines).
class ParseError : public Error {
public:
    using Error::Error;
};

/// Input that parses but violates a domain invariant.
class InvalidInput : public Error {
public:
    using Error::Error;
};

/// Exhaustive MMS search refused because the instance exceeds the size guard.
class InstanceTooLarge : public Error {
public:
    using Error::Error;
};

/// An internal cross-check between two routes disagreed.
class ConsistencyError : public Error {
public:
    using Error::Error;
};

}  // namespace fairdiv
