#pragma once

#include <stdexcept>
#include <string>

namespace docasd {

// Base for every error the toolkit raises on purpose. The CLI maps the
// concrete type onto an exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidInput : public Error {
 public:
  using Error::Error;
};

class EmptyDocument : public Error {
 public:
  EmptyDocument() : Error("document is empty after whitespace trim") {}
};

class SegmenterBackendError : public Error {
 public:
  SegmenterBackendError(const std::string& what, std::string diagnostics = {})
      : Error(what), diagnostics_(std::move(diagnostics)) {}
  const std::string& diagnostics() const { return diagnostics_; }

 private:
  std::string diagnostics_;
};

class ScorerUnavailable : public Error {
 public:
  using Error::Error;
};

class MetricContractError : public Error {
 public:
  using Error::Error;
};

class OracleTooLarge : public Error {
 public:
  using Error::Error;
};

class WindowTooLarge : public Error {
 public:
  WindowTooLarge(std::size_t k, std::size_t m)
      : Error("chunk size " + std::to_string(k) + " exceeds document length " +
              std::to_string(m)) {}
};

class DegenerateInput : public Error {
 public:
  using Error::Error;
};

class RecordSkipped : public Error {
 public:
  using Error::Error;
};

}  // namespace docasd
