#pragma once

#include <stdexcept>
#include <string>

namespace tailsim {

// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input text: JSON documents, unit strings, wire lists, scripts.
class ParseError : public Error {
 public:
  using Error::Error;
};

// A vector argument whose length does not match the model.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Arguments that are well formed but violate a precondition.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class NonConvergence : public Error {
 public:
  using Error::Error;
};

// Grasp ramp finished without touching the object.
class NoContact : public Error {
 public:
  using Error::Error;
};

// Pull-out requested on a configuration that does not hold the object.
class EmptyGrasp : public Error {
 public:
  using Error::Error;
};

// The runtime environment refused a resource: a port in use, an unreadable file.
class EnvironmentError : public Error {
 public:
  using Error::Error;
};

class DegenerateInput : public Error {
 public:
  using Error::Error;
};

}  // namespace tailsim
