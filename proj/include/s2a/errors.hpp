#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace s2a {

/// Root of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class UsageError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class NotFound : public Error {
 public:
  using Error::Error;
};

// llm-gateway

/// Connection failure or 5xx. The only retryable error.
class TransportError : public Error {
 public:
  using Error::Error;
};

class RetryExhausted : public Error {
 public:
  using Error::Error;
};

/// Replay or mock backend has no entry for a request. Never falls back to a live call.
class FixtureMissing : public Error {
 public:
  using Error::Error;
};

class ProtocolError : public Error {
 public:
  using Error::Error;
};

// prompt-registry

class MissingPlaceholder : public Error {
 public:
  explicit MissingPlaceholder(std::string name)
      : Error("missing binding for placeholder [" + name + "]"), name_(std::move(name)) {}
  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

class UnknownPlaceholder : public Error {
 public:
  explicit UnknownPlaceholder(std::string name)
      : Error("binding for unknown placeholder [" + name + "]"), name_(std::move(name)) {}
  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

class UnknownTemplate : public Error {
 public:
  using Error::Error;
};

// corpus

class EmptyInput : public Error {
 public:
  using Error::Error;
};

class SchemaError : public Error {
 public:
  SchemaError(std::size_t record_index, const std::string& what)
      : Error("record " + std::to_string(record_index) + ": " + what), index_(record_index) {}
  std::size_t record_index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

class DuplicateId : public Error {
 public:
  using Error::Error;
};

// judge

class RangeError : public Error {
 public:
  using Error::Error;
};

class NoAnswer : public Error {
 public:
  using Error::Error;
};

}  // namespace s2a
