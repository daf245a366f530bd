#pragma once

#include <stdexcept>
#include <string>

namespace qpot {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the domain of a closed-form expression (e.g. z <= 0).
class DomainError : public Error {
 public:
  using Error::Error;
};

class NormalizationError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration value or malformed configuration file.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A wavepacket constructor produced a state with zero norm.
class ConstructionError : public Error {
 public:
  using Error::Error;
};

/// Two fields that must share a grid do not.
class GridError : public Error {
 public:
  using Error::Error;
};

/// Non-finite values produced by a linear solve or time step.
class NumericsError : public Error {
 public:
  using Error::Error;
};

/// Evaluation requested too close to a node of the engineered profile.
class NodeSingularity : public Error {
 public:
  using Error::Error;
};

/// Every point of a derived field was masked out.
class EmptyFieldError : public Error {
 public:
  using Error::Error;
};

/// A Bohmian trajectory entered a masked (near-zero density) region.
class TrajectoryLost : public Error {
 public:
  TrajectoryLost(double time_s, const std::string& what)
      : Error(what), time_s_(time_s) {}
  double time() const noexcept { return time_s_; }

 private:
  double time_s_;
};

}  // namespace qpot
