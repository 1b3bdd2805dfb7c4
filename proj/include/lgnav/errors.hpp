#pragma once

#include <stdexcept>
#include <string>

namespace lgnav {

// Base for every error the library raises. Callers that only care about
// "something went wrong" catch this; the derived types carry the category.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class OutOfBounds : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class UnknownPhrase : public Error {
 public:
  explicit UnknownPhrase(std::string phrase)
      : Error("unknown phrase: \"" + phrase + "\""), phrase_(std::move(phrase)) {}
  const std::string& phrase() const noexcept { return phrase_; }

 private:
  std::string phrase_;
};

class TooFewSamples : public Error {
 public:
  using Error::Error;
};

class NoMatch : public Error {
 public:
  explicit NoMatch(std::string phrase)
      : Error("no map region matches \"" + phrase + "\""), phrase_(std::move(phrase)) {}
  const std::string& phrase() const noexcept { return phrase_; }

 private:
  std::string phrase_;
};

class NoFeasibleRoute : public Error {
 public:
  using Error::Error;
};

class NegativeWeight : public Error {
 public:
  using Error::Error;
};

class DegenerateTrajectory : public Error {
 public:
  using Error::Error;
};

class EmptyInput : public Error {
 public:
  using Error::Error;
};

class FeedbackExhausted : public Error {
 public:
  using Error::Error;
};

// Malformed input file. `line` is 0 when the problem is not tied to a line.
class ConfigError : public Error {
 public:
  ConfigError(std::string file, std::size_t line, const std::string& what)
      : Error(file + (line > 0 ? ":" + std::to_string(line) : std::string{}) + ": " + what),
        file_(std::move(file)),
        line_(line) {}
  const std::string& file() const noexcept { return file_; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::string file_;
  std::size_t line_;
};

}  // namespace lgnav
