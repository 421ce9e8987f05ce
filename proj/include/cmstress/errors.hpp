#pragma once

#include <stdexcept>
#include <string>

namespace cmstress {

// Base of everything thrown by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Problems with input data: files, CSV shape, labels, specs, parameters.
// The CLI maps these to exit code 2.
class DataError : public Error {
 public:
  using Error::Error;
};

// Problems with model files or model/input compatibility.
// The CLI maps these to exit code 3.
class ModelError : public Error {
 public:
  using Error::Error;
};

class MissingFileError final : public DataError {
 public:
  using DataError::DataError;
};

class MalformedHeaderError final : public DataError {
 public:
  using DataError::DataError;
};

class MalformedRowError final : public DataError {
 public:
  using DataError::DataError;
};

class UnknownLabelError final : public DataError {
 public:
  using DataError::DataError;
};

class EmptyFileError final : public DataError {
 public:
  using DataError::DataError;
};

class EmptyCorpusError final : public DataError {
 public:
  using DataError::DataError;
};

class InvalidSpecError final : public DataError {
 public:
  using DataError::DataError;
};

class InvalidParamsError final : public DataError {
 public:
  using DataError::DataError;
};

class DomainError final : public DataError {
 public:
  using DataError::DataError;
};

class EmptyNodeError final : public DataError {
 public:
  using DataError::DataError;
};

class EmptyTrainingSetError final : public DataError {
 public:
  using DataError::DataError;
};

class LengthMismatchError final : public DataError {
 public:
  using DataError::DataError;
};

class EmptyMatrixError final : public DataError {
 public:
  using DataError::DataError;
};

class UnknownMetricError final : public DataError {
 public:
  using DataError::DataError;
};

// Filesystem trouble on data paths (corpus writes, report output, ...).
class IoError final : public DataError {
 public:
  using DataError::DataError;
};

class DimensionMismatchError final : public ModelError {
 public:
  using ModelError::ModelError;
};

class VersionMismatchError final : public ModelError {
 public:
  using ModelError::ModelError;
};

class CorruptModelError final : public ModelError {
 public:
  using ModelError::ModelError;
};

// Filesystem trouble on model paths.
class ModelIoError final : public ModelError {
 public:
  using ModelError::ModelError;
};

}  // namespace cmstress
