#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace cbcomm {

// Root of every error thrown by the library. Callers that only care about
// "did the pipeline fail" catch this; the subclasses carry enough context to
// produce an actionable message.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(std::string doc_id, const std::string& what)
      : Error(doc_id + ": " + what), doc_id_(std::move(doc_id)) {}
  const std::string& doc_id() const noexcept { return doc_id_; }

 private:
  std::string doc_id_;
};

// Contract violation on an argument (bad shape, out-of-range parameter).
class ParameterError : public Error {
 public:
  using Error::Error;
};

class RangeError : public Error {
 public:
  using Error::Error;
};

class CorruptionError : public Error {
 public:
  using Error::Error;
};

// Raised by embedding / sentiment providers. Transport failures are
// retriable; contract breaches (wrong shapes, unnormalized probabilities)
// are not.
class ProviderError : public Error {
 public:
  ProviderError(const std::string& what, bool retriable, std::size_t batch_index = 0)
      : Error(what), retriable_(retriable), batch_index_(batch_index) {}
  bool retriable() const noexcept { return retriable_; }
  std::size_t batch_index() const noexcept { return batch_index_; }

 private:
  bool retriable_;
  std::size_t batch_index_;
};

class EstimationError : public Error {
 public:
  EstimationError(const std::string& what, std::vector<std::string> collinear = {})
      : Error(what), collinear_(std::move(collinear)) {}
  const std::vector<std::string>& collinear_columns() const noexcept { return collinear_; }

 private:
  std::vector<std::string> collinear_;
};

class DependencyError : public Error {
 public:
  using Error::Error;
};

class StaleArtifactError : public Error {
 public:
  using Error::Error;
};

}  // namespace cbcomm
