#pragma once

#include <stdexcept>
#include <string>

namespace wugnn {

/// Invalid configuration values (non-positive sizes, unknown keys, ...).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Shape or dimension mismatch, infeasible inputs, violated preconditions.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numeric operation left its domain (log of non-positive, 1 - u*h*v <= 0).
class NumericalDomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// An operation declined because its cost would be prohibitive.
class RefusalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or incompatible checkpoint / report / dataset file.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  IoError(const std::string& path, const std::string& what)
      : std::runtime_error(what + ": " + path), path_(path) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

/// Training produced a non-finite loss.
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace wugnn
