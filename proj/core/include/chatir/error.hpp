// Copyright 2026 The ChatIR Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace chatir {

// Base of all domain errors raised by the library. Argument and range
// violations use std::invalid_argument / std::out_of_range instead.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input file (JSON, binary header, CSV).
class ParseError : public Error {
 public:
  using Error::Error;
};

// Input parsed but references are inconsistent (dangling indices, unknown ids).
class IntegrityError : public Error {
 public:
  using Error::Error;
};

// A recorded backend ran out of stored rounds.
class ExhaustedError : public Error {
 public:
  using Error::Error;
};

// Remote backend failure after the retry budget was spent.
class TransportError : public Error {
 public:
  TransportError(const std::string& what, int http_status, int retries)
      : Error(what), http_status_(http_status), retries_(retries) {}

  // 0 when no HTTP response was received at all.
  int http_status() const noexcept { return http_status_; }
  int retries() const noexcept { return retries_; }

 private:
  int http_status_;
  int retries_;
};

// Training diverged (non-finite loss).
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace chatir
