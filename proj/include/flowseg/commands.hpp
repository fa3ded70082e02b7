// Copyright 2026 The flowseg authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace flowseg::cli {

/// Option values keyed by flag name (no leading dashes). Command-line values
/// override config-file values, which override built-in defaults.
using KeyValues = std::map<std::string, std::string>;

/// Parses a flat key=value config file; '#' starts a comment line.
KeyValues load_config_file(const std::filesystem::path& path);

/// Overlays `cli` on top of the config file it may name via its "config" key.
KeyValues resolve_options(const KeyValues& cli);

/// Files with the given extension in a directory, sorted by name.
std::vector<std::filesystem::path> list_files(const std::filesystem::path& dir,
                                              const std::string& extension);

/// Generates a synthetic clip (frames, both flow directions, ground truth).
int run_synth(const KeyValues& cli);

/// Segments a clip: frames + flows in, soft masks, binary masks and a run
/// manifest out.
int run_segment(const KeyValues& cli);

/// Scores predicted masks against ground-truth masks or boxes.
int run_eval(const KeyValues& cli);

/// Runs the dense-reference verification suite on a small instance and
/// prints one pass/fail line per check.
int run_oracle_check(const KeyValues& cli);

}  // namespace flowseg::cli
