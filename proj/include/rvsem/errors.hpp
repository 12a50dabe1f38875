#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rvsem {

// Root of every error the library throws on purpose.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed clique source; fatal for the whole parse.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class NotFoundError : public Error {
 public:
  explicit NotFoundError(const std::string& term)
      : Error("term not found: " + term), term_(term) {}
  const std::string& term() const noexcept { return term_; }

 private:
  std::string term_;
};

// Precondition violated on an argument's value (out of range, wrong shape).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Term whose weighted clique sum is the zero vector; it has no direction.
class DegenerateTermError : public Error {
 public:
  explicit DegenerateTermError(const std::string& term)
      : Error("degenerate term (zero vector): " + term), term_(term) {}
  const std::string& term() const noexcept { return term_; }

 private:
  std::string term_;
};

// A subtracted term lies (numerically) in the span of the ones before it.
class DependentSubtrahendError : public Error {
 public:
  explicit DependentSubtrahendError(const std::string& term)
      : Error("dependent subtrahend: " + term), term_(term) {}
  const std::string& term() const noexcept { return term_; }

 private:
  std::string term_;
};

// Unreadable or inconsistent binary store.
class CorruptionError : public Error {
 public:
  using Error::Error;
};

class VersionError : public CorruptionError {
 public:
  using CorruptionError::CorruptionError;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace rvsem
