#pragma once

#include <stdexcept>
#include <string>

namespace swl {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidParams : public Error {
 public:
  using Error::Error;
};

class NotHermitian : public Error {
 public:
  using Error::Error;
};

/// Kramers pairs of an embedded quaternionic matrix failed to match.
class PairMismatch : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class SizeError : public Error {
 public:
  using Error::Error;
};

class DegenerateParam : public Error {
 public:
  using Error::Error;
};

/// Contour quadrature left an imaginary residue above tolerance.
class ContourError : public Error {
 public:
  using Error::Error;
};

class NegativeDeterminant : public Error {
 public:
  using Error::Error;
};

/// Node doubling moved a reported value by more than its tolerance.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

class RangeError : public Error {
 public:
  using Error::Error;
};

class RegimeError : public Error {
 public:
  using Error::Error;
};

}  // namespace swl
