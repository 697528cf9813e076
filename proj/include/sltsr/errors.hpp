#pragma once

#include <stdexcept>
#include <string>

namespace sltsr {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class IndexError : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class CorruptDatabase : public Error {
 public:
  using Error::Error;
};

/// The simulated scene left the rig's working depth range.
class OutOfRangeError : public Error {
 public:
  OutOfRangeError(const std::string& what, double time_s) : Error(what), time_s_(time_s) {}
  double time_s() const { return time_s_; }

 private:
  double time_s_;
};

/// A motion hypothesis sweeps outside the reference database.
class HypothesisOutOfRange : public Error {
 public:
  using Error::Error;
};

class NoSignal : public Error {
 public:
  using Error::Error;
};

class AmbiguousSchedule : public Error {
 public:
  using Error::Error;
};

class DegenerateGeometry : public Error {
 public:
  using Error::Error;
};

}  // namespace sltsr
