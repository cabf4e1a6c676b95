#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace istn {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class OutOfRangeTheta : public Error {
  public:
    using Error::Error;
};

class DegenerateShell : public Error {
  public:
    using Error::Error;
};

class NegativeInput : public Error {
  public:
    using Error::Error;
};

class InvalidParameter : public Error {
  public:
    using Error::Error;
};

class QuadratureFailure : public Error {
  public:
    using Error::Error;
};

class DerivativeOverflow : public Error {
  public:
    using Error::Error;
};

class KappaOutOfRange : public Error {
  public:
    using Error::Error;
};

class PreconditionViolation : public Error {
  public:
    using Error::Error;
};

class ConfigError : public Error {
  public:
    using Error::Error;
};

class ParseError : public Error {
  public:
    ParseError(std::string const& path, int line, std::string const& field,
               std::string const& what)
        : Error(path + ":" + std::to_string(line) + ": " +
                (field.empty() ? std::string{} : "'" + field + "': ") + what),
          line_(line),
          field_(field) {}

    int line() const noexcept { return line_; }
    std::string const& field() const noexcept { return field_; }

  private:
    int line_;
    std::string field_;
};

/// Carries every violated invariant found while validating a config.
class ValidationError : public Error {
  public:
    explicit ValidationError(std::vector<std::string> problems)
        : Error(join(problems)), problems_(std::move(problems)) {}

    std::vector<std::string> const& problems() const noexcept
    {
        return problems_;
    }

  private:
    static std::string join(std::vector<std::string> const& items)
    {
        std::string out = "invalid configuration:";
        for (auto const& item : items) {
            out += "\n  - " + item;
        }
        return out;
    }

    std::vector<std::string> problems_;
};

class IoError : public Error {
  public:
    using Error::Error;
};

}  // namespace istn
