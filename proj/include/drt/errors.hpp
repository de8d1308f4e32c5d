#pragma once

#include <stdexcept>
#include <string>

namespace drt {

// Base of every toolkit error. Each subclass corresponds to one named failure
// mode so callers can recover selectively (e.g. relative_eval skips images
// whose target invocation raised TargetFailure).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DegenerateFeature : public Error {
 public:
  using Error::Error;
};

class ZeroVariance : public Error {
 public:
  using Error::Error;
};

class ShapeMismatch : public Error {
 public:
  using Error::Error;
};

class InvalidLayer : public Error {
 public:
  using Error::Error;
};

class InvalidLabel : public Error {
 public:
  using Error::Error;
};

class InvalidBox : public Error {
 public:
  using Error::Error;
};

class InvalidConfig : public Error {
 public:
  InvalidConfig(std::string field, const std::string& message)
      : Error(field + ": " + message), field_(std::move(field)), message_(message) {}

  const std::string& field() const { return field_; }
  const std::string& message() const { return message_; }

 private:
  std::string field_;
  std::string message_;
};

class DatasetEmpty : public Error {
 public:
  using Error::Error;
};

class LoadFailure : public Error {
 public:
  using Error::Error;
};

class TargetFailure : public Error {
 public:
  using Error::Error;
};

class TransientFailure : public TargetFailure {
 public:
  using TargetFailure::TargetFailure;
};

class NotInFixture : public TargetFailure {
 public:
  using TargetFailure::TargetFailure;
};

}  // namespace drt
