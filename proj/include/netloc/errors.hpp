#pragma once

#include <stdexcept>
#include <string>

namespace netloc {

// Every error raised by the library derives from Error so callers can catch
// one type at the boundary and still dispatch on the concrete kind.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class ConstraintIndexError : public Error {
 public:
  using Error::Error;
};

class InvalidNetworkError : public Error {
 public:
  using Error::Error;
};

class DegenerateNetworkError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

class ParameterError : public Error {
 public:
  using Error::Error;
};

class DirectionError : public Error {
 public:
  using Error::Error;
};

class SolveError : public Error {
 public:
  using Error::Error;
};

class NoBracketError : public Error {
 public:
  using Error::Error;
};

class GenerationError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

namespace detail {

template <typename E>
inline void require(bool condition, const std::string& message) {
  if (!condition) throw E(message);
}

}  // namespace detail
}  // namespace netloc
