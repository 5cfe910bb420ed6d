// Copyright (C) 2026 The bnn Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace bnn {

/// Base of every error raised by the library. Each subtype maps to one
/// failure class of the public contract.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual const char* kind() const noexcept { return "Error"; }
};

#define BNN_DEFINE_ERROR(Name)                                   \
  class Name : public Error {                                    \
   public:                                                       \
    using Error::Error;                                          \
    const char* kind() const noexcept override { return #Name; } \
  };

BNN_DEFINE_ERROR(InvalidValue)
BNN_DEFINE_ERROR(InvalidParam)
BNN_DEFINE_ERROR(ShapeError)
BNN_DEFINE_ERROR(DegenerateChannel)
BNN_DEFINE_ERROR(GraphError)
BNN_DEFINE_ERROR(ParseError)
BNN_DEFINE_ERROR(IoError)

#undef BNN_DEFINE_ERROR

}  // namespace bnn
