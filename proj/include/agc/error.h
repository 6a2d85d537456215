#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace agc {

// Base for every error raised by the toolkit. Callers that only need a
// diagnostic can catch this; the subclasses carry structured context.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// A plant state or input that is not finite.
class InvalidState : public Error {
 public:
  using Error::Error;
};

class DivergenceError : public Error {
 public:
  DivergenceError(std::int64_t step, double time)
      : Error("simulation diverged at step " + std::to_string(step) +
              " (t = " + std::to_string(time) + " s)"),
        step_(step),
        time_(time) {}

  std::int64_t step() const { return step_; }
  double time() const { return time_; }

 private:
  std::int64_t step_;
  double time_;
};

// ACE-limit rescaling did not converge within its iteration cap.
class RescaleError : public Error {
 public:
  using Error::Error;
};

// Malformed or version-mismatched file contents.
class FormatError : public Error {
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

// Network failure, HTTP 429 or 5xx after all retries.
class TransportError : public Error {
 public:
  TransportError(const std::string& what, int attempts)
      : Error(what), attempts_(attempts) {}
  int attempts() const { return attempts_; }

 private:
  int attempts_;
};

// Non-retryable HTTP 4xx.
class RequestError : public Error {
 public:
  RequestError(const std::string& what, int status)
      : Error(what), status_(status) {}
  int status() const { return status_; }

 private:
  int status_;
};

// LLM output that could not be turned into a report. Keeps the raw text
// for forensic logging.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::string raw)
      : Error(what), raw_(std::move(raw)) {}
  const std::string& raw() const { return raw_; }

 private:
  std::string raw_;
};

class AlignmentError : public Error {
 public:
  using Error::Error;
};

}  // namespace agc
