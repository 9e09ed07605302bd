#pragma once

#include <stdexcept>
#include <string>

namespace tslab {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid user-supplied problem data. `field()` names the offending input field.
class InvalidProblem : public Error {
 public:
  InvalidProblem(std::string field, const std::string& what)
      : Error(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

class InvalidBelief : public Error {
 public:
  using Error::Error;
};

// The log-odds chart is undefined on the boundary of the simplex.
class BoundaryBelief : public Error {
 public:
  using Error::Error;
};

class NumericalUnderflow : public Error {
 public:
  using Error::Error;
};

class NotTwoModel : public Error {
 public:
  using Error::Error;
};

class WrongShape : public Error {
 public:
  using Error::Error;
};

class NoFixedPoint : public Error {
 public:
  using Error::Error;
};

class EmptyFace : public Error {
 public:
  using Error::Error;
};

class MismatchedProblem : public Error {
 public:
  using Error::Error;
};

}  // namespace tslab
