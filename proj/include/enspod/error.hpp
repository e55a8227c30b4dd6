#pragma once

#include <stdexcept>
#include <string>

namespace enspod {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Malformed input text; carries the 1-based line number (0 when unknown).
class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class FileError : public Error {
 public:
  using Error::Error;
};

class SolverError : public Error {
 public:
  using Error::Error;
};

class RankError : public Error {
 public:
  RankError(const std::string& what, int available_rank)
      : Error(what + " (available rank " + std::to_string(available_rank) + ")"),
        available_rank_(available_rank) {}
  int available_rank() const { return available_rank_; }

 private:
  int available_rank_;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace enspod
