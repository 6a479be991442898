// Copyright (c) 2026 The invsmooth authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace invsmooth {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Caller-side contract violation (shape mismatch, bad configuration, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class GroupMismatch : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

class UnsupportedAutomorphism : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

/// Base class of failures caused by the numbers rather than by the caller.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// log() was asked for a rotation whose angle is within 1e-7 of pi.
class AngleAtCut : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class RankCollapse : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class NonComposable : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class LinearizationFailure : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class SingularInnovation : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace invsmooth
