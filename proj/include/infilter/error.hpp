// Copyright 2026 The infilter Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace infilter {

// Root of every error the library throws. Callers that only need a message
// can catch this; the subclasses let the CLI report a machine-readable kind.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual const char* kind() const noexcept { return "error"; }
};

class DomainError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "domain"; }
};

class InputError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "input"; }
};

// Raised when a CAR stage cannot be designed; stage() is the zero-based
// channel index, or -1 when the stage was designed in isolation.
class DesignError : public Error {
 public:
  DesignError(int stage, const std::string& what)
      : Error(stage >= 0 ? "stage " + std::to_string(stage) + ": " + what : what),
        stage_(stage) {}
  int stage() const noexcept { return stage_; }
  const char* kind() const noexcept override { return "design"; }

 private:
  int stage_;
};

class DatapathError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "datapath"; }
};

class FitError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "fit"; }
};

class IoError : public Error {
 public:
  IoError(const std::string& path, const std::string& what)
      : Error(path + ": " + what), path_(path) {}
  const std::string& path() const noexcept { return path_; }
  const char* kind() const noexcept override { return "io"; }

 private:
  std::string path_;
};

class FormatError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "format"; }
};

}  // namespace infilter
