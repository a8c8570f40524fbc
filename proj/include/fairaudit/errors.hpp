#pragma once

#include <stdexcept>
#include <string>

namespace fairaudit {

// Base class for every error the library raises on bad input or failed
// numerical preconditions. The CLI maps InputError subclasses to exit code 2
// and everything else to 3.
class AuditError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Problems with user-supplied files, flags or configuration.
class InputError : public AuditError {
 public:
  using AuditError::AuditError;
};

class SchemaError : public InputError {
 public:
  using InputError::InputError;
};

class ParseError : public InputError {
 public:
  ParseError(const std::string& what, long line)
      : InputError(line > 0 ? what + " (line " + std::to_string(line) + ")" : what),
        line_(line) {}
  long line() const noexcept { return line_; }

 private:
  long line_;
};

class EmptyGroupError : public InputError {
 public:
  using InputError::InputError;
};

class ConfigError : public InputError {
 public:
  using InputError::InputError;
};

class TrainingError : public AuditError {
 public:
  using AuditError::AuditError;
};

class FoldError : public AuditError {
 public:
  FoldError(const std::string& what, int fold_id)
      : AuditError(what), fold_id_(fold_id) {}
  int fold_id() const noexcept { return fold_id_; }

 private:
  int fold_id_;
};

class MatrixError : public AuditError {
 public:
  using AuditError::AuditError;
};

class InsufficientDataError : public AuditError {
 public:
  using AuditError::AuditError;
};

}  // namespace fairaudit
