#pragma once

#include <stdexcept>
#include <string>

namespace witsopt {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidParams : public Error {
 public:
  using Error::Error;
};

/// A correlation coefficient outside [-1, 1].
class InvalidPoint : public Error {
 public:
  using Error::Error;
};

/// Covariance has an eigenvalue below -1e-9 * trace.
class NotPsd : public Error {
 public:
  using Error::Error;
};

class SingularCovariance : public Error {
 public:
  using Error::Error;
};

/// Power outside the time-sharing window, or the window is empty.
class OutOfWindow : public Error {
 public:
  using Error::Error;
};

class QuadratureNotConverged : public Error {
 public:
  using Error::Error;
};

/// T1 / (T1 - T2) <= 0 in the closed-form information constraint.
class UndefinedLogArgument : public Error {
 public:
  using Error::Error;
};

class DegenerateDenominator : public Error {
 public:
  using Error::Error;
};

class EmptyFeasibleSet : public Error {
 public:
  using Error::Error;
};

class InvalidStrategy : public Error {
 public:
  using Error::Error;
};

}  // namespace witsopt
