#pragma once

#include <stdexcept>
#include <string>

namespace hyst {

// Base of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParseError : public Error {
public:
    using Error::Error;
};

class SchemaError : public Error {
public:
    using Error::Error;
};

class IngestError : public Error {
public:
    using Error::Error;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

class ZeroVectorError : public Error {
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

// Network-level failure that survived the retry budget.
class TransportError : public Error {
public:
    using Error::Error;
};

// 401/403 from a remote endpoint; never retried.
class AuthError : public TransportError {
public:
    using TransportError::TransportError;
};

}  // namespace hyst
