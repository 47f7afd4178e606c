#pragma once

#include <stdexcept>
#include <string>

namespace sentinel {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Malformed input: event logs, corpora, model files, plan libraries.
class ParseError : public Error {
public:
  using Error::Error;
};

/// A configuration value violates an invariant or names an unknown key.
class ConfigError : public Error {
public:
  using Error::Error;
};

/// An operation was invoked in a state that does not allow it.
class StateError : public Error {
public:
  using Error::Error;
};

}  // namespace sentinel
