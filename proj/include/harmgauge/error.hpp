#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hgauge {

/// Base class of every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller broke an operation's precondition (mismatched lattices, bad axis, ...).
class ContractViolation : public Error {
 public:
  using Error::Error;
};

/// Input outside the mathematical domain of an operation (non-SPD metric, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Explicit time stepping left its stability region.
class InstabilityError : public Error {
 public:
  using Error::Error;
};

/// Malformed RGF file or configuration text.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : Error(what + " (at byte offset " + std::to_string(offset) + ")"), offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

void require(bool condition, const std::string& message);

}  // namespace hgauge
