// Copyright 2026 The psf Authors
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

#ifndef PSF__ERROR_HPP_
#define PSF__ERROR_HPP_

#include <stdexcept>
#include <string>

namespace psf
{
/// Raised when a caller passes arguments that violate an operation's preconditions.
class InputError : public std::invalid_argument
{
public:
  explicit InputError(const std::string & what) : std::invalid_argument(what) {}
};

/// Raised when a file or byte stream does not follow its declared format.
class FormatError : public std::runtime_error
{
public:
  explicit FormatError(const std::string & what) : std::runtime_error(what) {}
};
}  // namespace psf

#endif  // PSF__ERROR_HPP_
