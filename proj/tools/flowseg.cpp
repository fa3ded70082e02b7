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

#include "flowseg/commands.hpp"

#include <CLI11.hpp>

#include <functional>
#include <string>
#include <vector>

namespace {

// Every flag funnels into a key/value map so config-file keys and
// command-line flags share one resolution path.
void add_keys(CLI::App* cmd, flowseg::cli::KeyValues& args,
              const std::vector<std::string>& keys) {
    for (const std::string& key : keys) {
        cmd->add_option_function<std::string>(
            "--" + key, [&args, key](const std::string& value) { args[key] = value; });
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"foreground object discovery on spacetime flow graphs"};
    app.require_subcommand(1);

    flowseg::cli::KeyValues args;
    int exit_code = 0;

    CLI::App* synth = app.add_subcommand("synth", "generate a synthetic clip");
    add_keys(synth, args,
             {"out", "shape", "size", "start-x", "start-y", "vel-x", "vel-y", "bg-vel-x",
              "bg-vel-y", "frames", "height", "width", "seed", "config"});
    synth->callback([&] { exit_code = flowseg::cli::run_synth(args); });

    CLI::App* segment = app.add_subcommand("segment", "segment the main object of a clip");
    add_keys(segment, args,
             {"frames", "flow-fwd", "flow-bwd", "out", "iterations", "radius", "sigma-k",
              "beta", "init", "init-sigma", "seed", "regression", "chain-steps", "channels",
              "prob-maps", "threshold", "deterministic", "config"});
    segment->callback([&] { exit_code = flowseg::cli::run_segment(args); });

    CLI::App* eval = app.add_subcommand("eval", "score predicted masks against ground truth");
    add_keys(eval, args, {"pred", "gt", "out", "theta", "threshold", "config"});
    eval->callback([&] { exit_code = flowseg::cli::run_eval(args); });

    CLI::App* oracle = app.add_subcommand(
        "oracle-check", "verify the matrix-free solver against dense references");
    add_keys(oracle, args,
             {"frames", "flow-fwd", "flow-bwd", "seed", "cap", "iterations", "radius",
              "sigma-k", "beta", "regression", "chain-steps", "channels", "init",
              "init-sigma", "threshold", "deterministic", "config"});
    oracle->callback([&] { exit_code = flowseg::cli::run_oracle_check(args); });

    CLI11_PARSE(app, argc, argv);
    return exit_code;
}
