#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace kgeeg {

// Root of every error the toolkit throws. The CLI maps subclasses onto exit
// codes: ParameterError/ConfigError -> 1, data-side errors -> 2,
// DivergenceError -> 3.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParameterError : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

// Malformed ERF header or magic.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Payload does not match what the header declares.
class IntegrityError : public Error {
 public:
  using Error::Error;
};

class MissingChannelError : public Error {
 public:
  explicit MissingChannelError(std::vector<std::string> missing);
  const std::vector<std::string>& missing() const { return missing_; }

 private:
  std::vector<std::string> missing_;
};

class MontageError : public Error {
 public:
  using Error::Error;
};

class DegenerateChannelError : public Error {
 public:
  explicit DegenerateChannelError(std::string channel);
  const std::string& channel() const { return channel_; }

 private:
  std::string channel_;
};

// Empty corpus, empty eval set, unreadable inputs.
class DataError : public Error {
 public:
  using Error::Error;
};

class SplitError : public Error {
 public:
  using Error::Error;
};

class DivergenceError : public Error {
 public:
  explicit DivergenceError(std::size_t iteration);
  std::size_t iteration() const { return iteration_; }

 private:
  std::size_t iteration_;
};

// Config file violates the documented schema; `path` is a JSON-pointer-like
// field path such as "/train/lr".
class ConfigError : public Error {
 public:
  ConfigError(std::string path, const std::string& what);
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

}  // namespace kgeeg
