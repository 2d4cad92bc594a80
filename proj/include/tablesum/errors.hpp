#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tablesum {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed CSV structure (unterminated quote, ragged row, missing header).
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// A cell that does not parse as its declared value type.
class TypeError : public Error {
 public:
  TypeError(std::string column, std::size_t line, std::string text)
      : Error("line " + std::to_string(line) + ", column '" + column +
              "': cannot parse '" + text + "'"),
        column_(std::move(column)),
        line_(line),
        text_(std::move(text)) {}

  const std::string& column() const noexcept { return column_; }
  std::size_t line() const noexcept { return line_; }
  const std::string& text() const noexcept { return text_; }

 private:
  std::string column_;
  std::size_t line_;
  std::string text_;
};

class SchemaError : public Error {
 public:
  using Error::Error;
};

/// A SliceSpec that does not validate against a table schema.
class SpecError : public Error {
 public:
  using Error::Error;
};

class NumericDomainError : public Error {
 public:
  using Error::Error;
};

/// Two inputs that should describe the same thing disagree.
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

class WriteOnceViolation : public Error {
 public:
  explicit WriteOnceViolation(const std::string& key)
      : Error("state key '" + key + "' is already written"), key_(key) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class BackendError : public Error {
 public:
  BackendError(const std::string& what, int attempts)
      : Error(what), attempts_(attempts) {}
  int attempts() const noexcept { return attempts_; }

 private:
  int attempts_;
};

/// Retries exhausted on timeouts or 5xx replies.
class BackendUnavailable : public BackendError {
 public:
  using BackendError::BackendError;
};

/// The endpoint rejected the request (4xx); never retried.
class RequestError : public BackendError {
 public:
  RequestError(const std::string& what, int status, int attempts)
      : BackendError(what, attempts), status_(status) {}
  int status() const noexcept { return status_; }

 private:
  int status_;
};

/// A mock backend could not parse the prompt it was handed.
class EchoError : public BackendError {
 public:
  explicit EchoError(const std::string& what) : BackendError(what, 1) {}
};

class JudgeFormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace tablesum
