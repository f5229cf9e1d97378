#pragma once

#include <stdexcept>
#include <string>

namespace opensub {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Vector lengths, matrix shapes or ambient dimensions disagree.
class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

// A matrix that must be Hermitian is not, beyond tolerance.
class SymmetryViolation : public Error {
 public:
  using Error::Error;
};

// A subspace expected to lie inside another one does not.
class ContainmentError : public Error {
 public:
  using Error::Error;
};

// Argument outside its admissible range (ranks, lattice sizes, grids...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Two independent computations of the same object disagree.
class ConsistencyError : public Error {
 public:
  ConsistencyError(const std::string& what, double first, double second)
      : Error(what), first_(first), second_(second) {}

  double first() const { return first_; }
  double second() const { return second_; }

 private:
  double first_;
  double second_;
};

// Malformed input file.
class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace opensub
