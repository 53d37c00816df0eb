#pragma once

#include <stdexcept>
#include <string>

namespace debatekit {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& message) : std::runtime_error(message) {}
};

/// Corpus loading, validation, or splitting failed.
class CorpusError : public Error {
 public:
  using Error::Error;
};

/// Template lookup or rendering failed.
class TemplateError : public Error {
 public:
  using Error::Error;
};

/// Backend request validation or transport failed.
class BackendError : public Error {
 public:
  using Error::Error;
};

/// Backend lacks a requested capability (for example sequence scoring).
class CapabilityError : public BackendError {
 public:
  using BackendError::BackendError;
};

/// Debate execution or trajectory validation failed.
class EngineError : public Error {
 public:
  using Error::Error;
};

/// Reward estimation or dataset generation failed.
class DatasetError : public Error {
 public:
  using Error::Error;
};

/// Loss input validation failed.
class LossError : public Error {
 public:
  using Error::Error;
};

/// Evaluation run failed.
class EvalError : public Error {
 public:
  using Error::Error;
};

/// Run configuration is malformed.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace debatekit
