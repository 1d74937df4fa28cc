#pragma once

#include <stdexcept>
#include <string>

namespace argus {

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
public:
  using Error::Error;
};

class DegenerateInput : public Error {
public:
  using Error::Error;
};

class UnsupportedGrid : public Error {
public:
  using Error::Error;
};

class CodecError : public Error {
public:
  using Error::Error;
};

class ConfigError : public Error {
public:
  using Error::Error;
};

// Network or backend failure. Aborts the current image, never the batch.
class TransportError : public Error {
public:
  using Error::Error;
};

// The backend answered, but the answer violates the wire contract.
class ProtocolError : public Error {
public:
  using Error::Error;
};

class MissingDepth : public Error {
public:
  using Error::Error;
};

// A configured HTTP backend did not answer the startup probe.
class BackendUnreachable : public Error {
public:
  using Error::Error;
};

class EvaluationError : public Error {
public:
  using Error::Error;
};

}  // namespace argus
