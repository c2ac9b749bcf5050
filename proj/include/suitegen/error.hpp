#pragma once

#include <stdexcept>
#include <string>

namespace suitegen {

// Base for every error raised by the pipeline. Stage drivers map these to
// exit statuses; per-problem failures are caught and recorded by evolution.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
  using Error::Error;
};

class InvalidEmbedding : public Error {
public:
  using Error::Error;
};

class IoError : public Error {
public:
  using Error::Error;
};

class FormatError : public Error {
public:
  using Error::Error;
};

} // namespace suitegen
