#pragma once

#include <stdexcept>
#include <string>

namespace sfg {

/// Base of every error the toolkit throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent user input (scenario fields, material files).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the physical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A material model that cannot be evaluated (e.g. negative Sellmeier radicand).
class ModelError : public Error {
 public:
  using Error::Error;
};

/// Precondition of a design or analysis call is not met by its inputs.
class ContractError : public Error {
 public:
  using Error::Error;
};

/// A design scheme cannot produce a profile for the requested parameters.
class DesignError : public Error {
 public:
  using Error::Error;
};

/// Degenerate point of the two-level Hamiltonian (Q = ΔK = 0) or similar.
class SingularityError : public Error {
 public:
  using Error::Error;
};

/// ODE integration failed; carries the propagation coordinate where it stopped.
class IntegrationError : public Error {
 public:
  IntegrationError(const std::string& what, double z_mm) : Error(what), z_mm_(z_mm) {}
  double z_mm() const noexcept { return z_mm_; }

 private:
  double z_mm_;
};

}  // namespace sfg
