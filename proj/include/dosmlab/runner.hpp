/*
   Copyright 2026 The dosmlab Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dosmlab/error.hpp"
#include "dosmlab/experiments.hpp"

namespace dosmlab {

// Schema violation; the message starts with the offending key path.
class ConfigError : public InvalidInput {
public:
    explicit ConfigError(const std::string& msg) : InvalidInput(msg) {}
};

// Parsers for the config fragments, also used for standalone measure files.
//   measure:  {"family", "params": {...}, "atoms": n, "points": [[loc, w], ...]}
//   function: {"family": "bump" | "smoothstep" | "zero", ...}, see the registry
Measure parse_measure(const Json& j, const std::string& path = "measure");
TestFunction parse_function(const Json& j, const std::string& path = "function");
BoxSpec parse_box(const Json& j, const std::string& path = "box");
QuadratureSpec parse_quadrature(const Json& j, const std::string& path = "quadrature");

struct ExperimentInfo {
    std::string name;
    std::string description;
    std::vector<std::string> required;
    std::string minimal_config;
};

// Stable order.
const std::vector<ExperimentInfo>& experiment_registry();

struct RunOptions {
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
    std::optional<std::string> out_dir;
};

// A validated config; nothing has been computed yet.
struct PreparedRun {
    std::string kind;
    std::uint64_t seed = 1;
    int threads = 1;
    std::string out_dir = ".";
    Json config;
    std::function<ExperimentReport()> execute;
};

PreparedRun prepare_run(const Json& config, const RunOptions& options = {});

struct RunResult {
    ExperimentReport report;
    Json document;
    std::string json_path;
    std::string csv_path;
};

// Report plus provenance: the config echoed as given, seed and a timestamp.
Json report_document(const ExperimentReport& report, const Json& config, std::uint64_t seed,
                     const std::string& timestamp);

// Validates, executes and (when write_files) writes
// {kind}-{seed}-{timestamp}.json/.csv into the output directory.
RunResult run_config(const Json& config, const RunOptions& options = {}, bool write_files = true);

// 0 for pass/none, 2 fail, 3 inconclusive.
int exit_code(Verdict v);

}  // namespace dosmlab
