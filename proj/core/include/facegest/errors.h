#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace facegest {

// Malformed input bytes. offset() is the byte position where decoding failed.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : std::runtime_error(what + " at byte offset " + std::to_string(offset)), offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

// An argument outside an operation's domain (empty shape, lost tracker state, D <= 0 ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// A caller broke an operation's precondition (modifier key passed to the composer,
// letter key outside 2..9, ...).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Bad or inconsistent configuration / data files.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace facegest
