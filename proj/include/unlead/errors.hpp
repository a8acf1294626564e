/*
 * Copyright 2026 The unlead authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef UNLEAD_ERRORS_HPP
#define UNLEAD_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace unlead {

/// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent data (corpus files, checkpoints, reports).
/// Maps to process exit code 1 in the CLI.
struct DataError : Error {
  using Error::Error;
};

/// Invalid configuration or invocation. Maps to process exit code 2.
struct UsageError : Error {
  using Error::Error;
};

}  // namespace unlead

#endif  // UNLEAD_ERRORS_HPP
