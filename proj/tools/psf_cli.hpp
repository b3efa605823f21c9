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

#ifndef PSF_TOOLS__PSF_CLI_HPP_
#define PSF_TOOLS__PSF_CLI_HPP_

#include <ostream>
#include <string>
#include <vector>

namespace psf::cli
{
/// Exit status: 0 success, 1 usage or input error, 2 malformed file.
int run(const std::vector<std::string> & args, std::ostream & out, std::ostream & err);
}  // namespace psf::cli

#endif  // PSF_TOOLS__PSF_CLI_HPP_
