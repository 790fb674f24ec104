#pragma once

#include <stdexcept>
#include <string>

namespace trackforge {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line = 0)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

class NonMonotonicFrames : public ParseError {
 public:
  using ParseError::ParseError;
};

class MissingFlow : public Error {
 public:
  explicit MissingFlow(int frame)
      : Error("no flow field for frame pair " + std::to_string(frame) + " -> " +
              std::to_string(frame + 1)),
        frame_(frame) {}
  int frame() const noexcept { return frame_; }

 private:
  int frame_;
};

class EmptySupport : public Error {
 public:
  EmptySupport() : Error("box covers no pixel centers of the flow field") {}
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class NotAGap : public Error {
 public:
  using Error::Error;
};

class InvalidDistribution : public Error {
 public:
  using Error::Error;
};

class EmptySelection : public Error {
 public:
  EmptySelection() : Error("entropy evaluation needs at least one probability vector") {}
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

}  // namespace trackforge
