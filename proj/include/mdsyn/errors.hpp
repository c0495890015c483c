#pragma once

#include <stdexcept>
#include <string>

namespace mdsyn {

// Base of everything this library throws on purpose. The CLI maps the three
// families onto exit codes: data 1, config 2, numeric 3.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class DataError : public Error {
public:
  using Error::Error;
};

class ConfigError : public Error {
public:
  using Error::Error;
};

class NumericError : public Error {
public:
  using Error::Error;
};

// Shape mismatch in a tensor primitive. Always a programming error, never a
// recoverable data condition.
class ShapeError : public NumericError {
public:
  using NumericError::NumericError;
};

// SMILES parsing failure; message carries the character offset.
class SmilesError : public DataError {
public:
  SmilesError(const std::string& kind, std::size_t offset, const std::string& detail)
      : DataError(kind + " at offset " + std::to_string(offset) + ": " + detail),
        kind_(kind), offset_(offset) {}
  const std::string& kind() const { return kind_; }
  std::size_t offset() const { return offset_; }

private:
  std::string kind_;
  std::size_t offset_;
};

class FileError : public DataError {
public:
  using DataError::DataError;
};

class SchemaError : public DataError {
public:
  using DataError::DataError;
};

class IntegrityError : public DataError {
public:
  using DataError::DataError;
};

// Missing drug / cell-line features at train or predict time.
class DataGapError : public DataError {
public:
  using DataError::DataError;
};

class MissingTissueError : public DataError {
public:
  using DataError::DataError;
};

class MissingEmbeddingError : public DataError {
public:
  using DataError::DataError;
};

}  // namespace mdsyn
