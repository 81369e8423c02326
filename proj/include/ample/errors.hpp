#pragma once

#include <stdexcept>
#include <string>

namespace ample {

// Exit codes used by the CLI. Library code throws the matching exception;
// the CLI maps the class to the code.
enum class ExitCode : int {
  ok = 0,
  spec_error = 2,
  precondition_error = 3,
  invariant_violation = 4,
  resource_error = 5,
};

class Error : public std::runtime_error {
public:
  Error(ExitCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ExitCode code() const { return code_; }

private:
  ExitCode code_;
};

// Malformed input: groupoid specs, serialized files, invalid set literals,
// non-injective generators, functions failing their axioms.
class SpecError : public Error {
public:
  explicit SpecError(const std::string& what)
      : Error(ExitCode::spec_error, what) {}
};

// An operation was called outside its contract: mismatched unit spaces,
// points outside a bisection domain, missing measure gap, failed hypothesis.
class PreconditionError : public Error {
public:
  explicit PreconditionError(const std::string& what)
      : Error(ExitCode::precondition_error, what) {}
};

// A bounded search ran out of table. Callers may extend n_max and retry.
class SearchExhausted : public PreconditionError {
public:
  explicit SearchExhausted(const std::string& what)
      : PreconditionError(what) {}
};

// An internal invariant that is supposed to hold by construction failed.
class InvariantViolation : public Error {
public:
  explicit InvariantViolation(const std::string& what)
      : Error(ExitCode::invariant_violation, what) {}
};

// Numeric estimation failed to converge within its iteration cap.
class NumericError : public Error {
public:
  explicit NumericError(const std::string& what)
      : Error(ExitCode::invariant_violation, what) {}
};

class ResourceError : public Error {
public:
  explicit ResourceError(const std::string& what)
      : Error(ExitCode::resource_error, what) {}
};

}  // namespace ample
