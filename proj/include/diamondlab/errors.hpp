#pragma once

#include <stdexcept>
#include <string>

namespace diamondlab {

/// Base class of every error raised by the library. The CLI maps these to
/// exit code 1 (computation error) unless they are ConfigError.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define DIAMONDLAB_DEFINE_ERROR(Name)      \
  class Name : public Error {              \
   public:                                 \
    using Error::Error;                    \
  };

DIAMONDLAB_DEFINE_ERROR(DomainError)
DIAMONDLAB_DEFINE_ERROR(ToleranceNotReached)
DIAMONDLAB_DEFINE_ERROR(NotFound)
DIAMONDLAB_DEFINE_ERROR(UnsupportedModel)
DIAMONDLAB_DEFINE_ERROR(TooLarge)
DIAMONDLAB_DEFINE_ERROR(BadExponent)
DIAMONDLAB_DEFINE_ERROR(NoTrapPoint)
DIAMONDLAB_DEFINE_ERROR(SideConditionFailed)
DIAMONDLAB_DEFINE_ERROR(DivergentTail)
DIAMONDLAB_DEFINE_ERROR(BadParams)
DIAMONDLAB_DEFINE_ERROR(NonGaussianLaw)
DIAMONDLAB_DEFINE_ERROR(BracketInvalid)
DIAMONDLAB_DEFINE_ERROR(BadInput)
DIAMONDLAB_DEFINE_ERROR(IoError)

#undef DIAMONDLAB_DEFINE_ERROR

/// Usage or configuration problem; carries the offending field name.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& message)
      : Error(field.empty() ? message : field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// TOML parse failure with the source line.
class ParseError : public ConfigError {
 public:
  ParseError(long line, const std::string& message)
      : ConfigError("", "line " + std::to_string(line) + ": " + message), line_(line) {}
  long line() const noexcept { return line_; }

 private:
  long line_;
};

}  // namespace diamondlab
