#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace pilotscat {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised for arguments outside an operation's domain (r = 0, theta = 0, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

class NodalSingularity : public Error {
 public:
  using Error::Error;
};

class NoRoot : public Error {
 public:
  using Error::Error;
};

class XPointNotFound : public Error {
 public:
  using Error::Error;
};

class StepUnderflow : public Error {
 public:
  using Error::Error;
};

class RegimeViolation : public Error {
 public:
  using Error::Error;
};

class InvalidGrid : public Error {
 public:
  using Error::Error;
};

class DegenerateCell : public Error {
 public:
  using Error::Error;
};

class InsufficientStatistics : public Error {
 public:
  using Error::Error;
};

// Scenario input problems. line is 1-based (0 when unknown).
class ParseError : public Error {
 public:
  explicit ParseError(const std::string& msg, int line = 0, std::string field = {})
      : Error(msg), line_(line), field_(std::move(field)) {}
  int line() const { return line_; }
  const std::string& field() const { return field_; }

 private:
  int line_;
  std::string field_;
};

// A parameter set violating one or more invariants; the message lists all.
class ValidationError : public Error {
 public:
  using Error::Error;
};

}  // namespace pilotscat
