#pragma once

#include <stdexcept>
#include <string>

namespace asv {

// Malformed or unsupported input file. The message carries the file and
// line/field context.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnsupportedVersionError : public ParseError {
 public:
  using ParseError::ParseError;
};

// Non-finite state produced inside an integrator stage.
class IntegrationError : public std::runtime_error {
 public:
  IntegrationError(int stage, const std::string& what)
      : std::runtime_error(what), stage_(stage) {}
  int stage() const { return stage_; }

 private:
  int stage_;
};

// API misuse such as stepping a finished episode.
class ProtocolError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace asv
