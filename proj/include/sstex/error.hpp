#pragma once

#include <stdexcept>
#include <string>

namespace sstex {

// All library failures derive from Error so callers can catch one type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class UnsupportedOrder : public Error {
 public:
  using Error::Error;
};

class InsufficientData : public Error {
 public:
  using Error::Error;
};

// Raised when a (regularized) class covariance cannot be factorized.
class SingularCovariance : public Error {
 public:
  explicit SingularCovariance(const std::string& what, int class_index = -1)
      : Error(what), class_index_(class_index) {}
  int class_index() const noexcept { return class_index_; }

 private:
  int class_index_;
};

class IngestionError : public Error {
 public:
  using Error::Error;
};

class ExportError : public Error {
 public:
  using Error::Error;
};

}  // namespace sstex
