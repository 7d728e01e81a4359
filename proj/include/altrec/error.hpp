#pragma once

#include <stdexcept>
#include <string>

namespace altrec {

// Root of every error the library raises. The CLI maps the three families
// (usage, data, numerical) onto distinct exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UsageError : public Error {
 public:
  using Error::Error;
};

class DataError : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

class MissingFileError : public DataError {
 public:
  explicit MissingFileError(const std::string& path)
      : DataError("missing file: " + path), path_(path) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

class DuplicateIdError : public DataError {
 public:
  explicit DuplicateIdError(const std::string& id)
      : DataError("duplicate product_id: " + id), id_(id) {}
  const std::string& id() const noexcept { return id_; }

 private:
  std::string id_;
};

class ZeroNormError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class NoNegativePoolError : public DataError {
 public:
  using DataError::DataError;
};

class NoCoverageError : public DataError {
 public:
  using DataError::DataError;
};

// An upstream artifact no longer matches the fingerprint recorded when it was
// produced.
class StaleArtifactError : public DataError {
 public:
  using DataError::DataError;
};

}  // namespace altrec
