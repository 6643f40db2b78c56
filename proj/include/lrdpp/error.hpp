#pragma once

#include <stdexcept>
#include <string>

namespace lrdpp {

// Base of every exception thrown by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Malformed basket input or invalid split parameters.
class DataError : public Error {
public:
  using Error::Error;
};

// Model file that cannot be read back.
class ModelFormatError : public Error {
public:
  using Error::Error;
};

// Invalid arguments to the kernel / likelihood routines.
class KernelError : public Error {
public:
  using Error::Error;
};

// Conditioning on a basket the model assigns zero probability, or a
// conditioned model with no mass left.
class ConditioningError : public Error {
public:
  using Error::Error;
};

class TrainingError : public Error {
public:
  using Error::Error;
};

// Guard violations and internal disagreements in the brute-force references.
class OracleError : public Error {
public:
  using Error::Error;
};

}  // namespace lrdpp
