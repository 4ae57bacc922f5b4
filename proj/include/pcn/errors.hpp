// Copyright 2026 The pcn Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace pcn {

/// Base of every error raised by the engine.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Inconsistent shapes or settings between components.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Bad data handed to an otherwise valid component.
class InputError : public Error {
 public:
  using Error::Error;
};

/// API called in the wrong order or with an empty argument.
class UsageError : public Error {
 public:
  using Error::Error;
};

/// Malformed on-disk container. The message names the byte offset.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Non-finite values observed during training or evaluation.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace pcn
