#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tbed {

// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed text in one of the line-oriented file formats.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line, std::size_t column = 0)
      : Error(format(what, line, column)), line_(line), column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  static std::string format(const std::string& what, std::size_t line,
                            std::size_t column) {
    std::string out = "line " + std::to_string(line);
    if (column > 0) out += ", column " + std::to_string(column);
    return out + ": " + what;
  }

  std::size_t line_;
  std::size_t column_;
};

// Tag inventory problems: unknown tags, duplicate declarations, unbound roles.
class TagsetError : public Error {
 public:
  using Error::Error;
};

// Invalid configuration values (train config, synthetic spec, fold counts).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Predicted and gold corpora do not line up token by token.
class AlignmentError : public Error {
 public:
  using Error::Error;
};

// Filesystem failures, kept apart from errors about file contents.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace tbed
