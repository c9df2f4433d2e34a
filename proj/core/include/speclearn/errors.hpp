#pragma once

#include <stdexcept>
#include <string>

namespace speclearn {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid parameter combinations, bad placements, unusable requests.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed files: truncated payloads, bad magic, checksum failures.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Tensor shape disagreements.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Dataset/corpus content problems (empty corpus, bad labels, ...).
class DataError : public Error {
 public:
  using Error::Error;
};

// Cross-artifact incompatibility: checkpoint version or preprocessing
// digest does not match the data it is being used with.
class CompatError : public Error {
 public:
  using Error::Error;
};

}  // namespace speclearn
