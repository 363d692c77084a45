#pragma once

#include <stdexcept>
#include <string>

namespace hecke {

// Base for every failure raised by the library. The CLI maps the concrete
// subclasses onto process exit codes.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Malformed textual / JSON input.
class ParseError : public Error {
public:
  using Error::Error;
};

// An element fails the defining conditions of the group it was claimed to
// belong to (orthogonality, determinant, identity component, shape).
class MembershipError : public Error {
public:
  using Error::Error;
};

// Level N rejected (not squarefree, not positive).
class LevelError : public Error {
public:
  using Error::Error;
};

// A right-coset enumeration would exceed the configured bound.
class BoundError : public Error {
public:
  using Error::Error;
};

// Arithmetic precondition violated (singular matrix, non-prime modulus, ...).
class ArithmeticError : public Error {
public:
  using Error::Error;
};

// Internal consistency trap: a result that mathematics forbids was computed
// (non-integral structure constant, broken divisibility chain, ...).
class InvariantError : public Error {
public:
  using Error::Error;
};

} // namespace hecke
