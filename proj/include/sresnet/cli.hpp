/* Copyright 2026 The SResNet Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef SRESNET_CLI_HPP_
#define SRESNET_CLI_HPP_

#include <cstdint>
#include <exception>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

namespace sresnet {

/// Process exit codes shared by every subcommand.
enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,     // anything unclassified
  kExitConfig = 2,      // bad flags, config file or values
  kExitData = 3,        // unreadable data, unknown class, checkpoint mismatch
  kExitDivergence = 4,  // non-finite training loss
};

/// Maps an exception thrown by the library to its exit code.
int exit_code_for(const std::exception& e);

/// Fully resolved settings of one invocation: defaults, then the --config
/// file, then command-line flags. Echoed to <out>/run-config.json.
struct RunConfig {
  std::string command;
  nlohmann::json values;  // flat: key -> string | number | bool

  std::string str(const std::string& key) const;
  std::int64_t integer(const std::string& key) const;
  std::uint64_t seed() const;
  double real(const std::string& key) const;
  bool flag(const std::string& key) const;
  /// {"command": ..., <values>}; loadable again through --config.
  nlohmann::json echo() const;
};

/// Entry point behind the `sresnet` executable. `args` excludes the
/// program name. Logs go to `out`, diagnostics and usage to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sresnet

#endif  // SRESNET_CLI_HPP_
