#pragma once

#include <stdexcept>
#include <string>

namespace anchor_forge {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument is outside the documented domain of an operation.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// An explanation was requested for a document without tokens.
class EmptyDocumentError : public Error {
 public:
  using Error::Error;
};

/// An enumeration would exceed its configured state-space cutoff.
class SearchSpaceError : public Error {
 public:
  using Error::Error;
};

/// A structural precondition of an analytic result does not hold.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// The model does not expose an input gradient.
class NotDifferentiableError : public Error {
 public:
  using Error::Error;
};

}  // namespace anchor_forge
