/*
 * Copyright 2026 The fedmdl Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#ifndef FEDMDL_ERROR_H_
#define FEDMDL_ERROR_H_

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace fedmdl {

// Root of every error thrown by the library. Subclasses map onto distinct
// CLI exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input text. line() is 1-based, 0 when not line-oriented.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Caller broke a documented precondition.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Digest or metadata mismatch on a fragment.
class IntegrityError : public Error {
 public:
  using Error::Error;
};

// Secure counting failed, e.g. collision threshold exceeded on every retry.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

// Authenticated decryption failed.
class AuthError : public Error {
 public:
  using Error::Error;
};

// Query text does not parse. position() is the 1-based token index.
class QuerySyntaxError : public Error {
 public:
  QuerySyntaxError(const std::string& what, std::size_t position)
      : Error("syntax error at token " + std::to_string(position) + ": " +
              what),
        position_(position) {}
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

// The global model cannot answer the query; rerun in exact mode.
class ModelInsufficient : public Error {
 public:
  using Error::Error;
};

// A simulated job touched an unreachable node.
class JobFailure : public Error {
 public:
  JobFailure(const std::string& what, std::string partial_trace)
      : Error(what), partial_trace_(std::move(partial_trace)) {}
  const std::string& partial_trace() const { return partial_trace_; }

 private:
  std::string partial_trace_;
};

}  // namespace fedmdl

#endif  // FEDMDL_ERROR_H_
