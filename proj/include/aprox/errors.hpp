#pragma once

#include <stdexcept>
#include <string>

namespace aprox {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A sample oracle reported a zero subgradient at strictly positive excess loss.
class OracleInconsistency : public Error {
 public:
  using Error::Error;
};

class UnsupportedProx : public Error {
 public:
  using Error::Error;
};

// The reference optimum could not be certified to the accuracy a run needs.
class NonCertified : public Error {
 public:
  using Error::Error;
};

class RankDeficient : public Error {
 public:
  using Error::Error;
};

class InsufficientDecay : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace aprox
