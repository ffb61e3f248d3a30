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
#ifndef FEDMDL_TOOLS_CLI_H_
#define FEDMDL_TOOLS_CLI_H_

#include <iosfwd>
#include <string>
#include <vector>

namespace fedmdl::cli {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kUsage = 2,
  kParse = 3,
  kIntegrity = 4,
  kProtocol = 5,
  kAuth = 6,
  kModelInsufficient = 7,
};

// Runs one command line (args excludes the program name). Everything the
// command prints goes to out / err.
int Run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fedmdl::cli

#endif  // FEDMDL_TOOLS_CLI_H_
