#pragma once

#include <stdexcept>
#include <string>

namespace btm {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A scenario or parameter set violates its documented constraints.
class InvalidConfig : public Error {
 public:
  using Error::Error;
};

/// A community has no member readings to vote or average over.
class EmptyCommunity : public Error {
 public:
  EmptyCommunity() : Error("community has no member readings") {}
};

/// The center node produced no reading for this step.
class MissingCenterReading : public Error {
 public:
  MissingCenterReading() : Error("center node produced no reading") {}
};

/// Indicator and ground-truth vectors differ in length.
class LengthMismatch : public Error {
 public:
  LengthMismatch(std::size_t a, std::size_t b)
      : Error("length mismatch: " + std::to_string(a) + " vs " + std::to_string(b)) {}
};

/// The truncated transition rejected too many draws; the process variance is pathological.
class SamplingExhausted : public Error {
 public:
  using Error::Error;
};

}  // namespace btm
