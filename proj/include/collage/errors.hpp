#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace collage {

// Precondition violated on an otherwise well-formed value (bad index, bad extent).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Wrong number of inputs for the requested grid.
class ArityError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed input bytes. `offset` is the byte position where parsing failed.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : std::runtime_error(what + " (at byte offset " + std::to_string(offset) + ")"),
        offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

// Recovery-protocol or wire-protocol violation.
class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid workload/scheme/serve configuration. Message names the offending field.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& field, const std::string& msg)
      : std::runtime_error(field + ": " + msg), field_(field) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace collage
