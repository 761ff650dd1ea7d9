#pragma once

#include <stdexcept>
#include <string>

namespace fedq {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Operands live on different dimensions, charts or connections.
class ContextMismatch : public Error {
public:
    using Error::Error;
};

/// A fixed-point recursion did not repeat within its iteration cap.
class NonConvergence : public Error {
public:
    using Error::Error;
};

/// A computed object failed the identity it is required to satisfy.
/// Raised only when an internal invariant is broken.
class IdentityFailure : public Error {
public:
    using Error::Error;
};

/// Invalid user-supplied data: bad index, asymmetric connection, non-symplectic
/// field, Lie algebra axiom violation and similar.
class InvalidInput : public Error {
public:
    using Error::Error;
};

/// Syntax or semantic error at a position in an input text.
class ParseError : public Error {
public:
    ParseError(const std::string& msg, int line, int column)
        : Error(std::to_string(line) + ":" + std::to_string(column) + ": " + msg),
          line_(line),
          column_(column) {}

    int line() const noexcept { return line_; }
    int column() const noexcept { return column_; }

private:
    int line_;
    int column_;
};

}  // namespace fedq
