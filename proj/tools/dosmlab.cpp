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

#include <cstdio>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "dosmlab/runner.hpp"

using namespace dosmlab;

namespace {

Json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot read '" + path + "'");
    try {
        return Json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw InvalidInput("'" + path + "' is not valid JSON: " + e.what());
    }
}

void print_list() {
    for (const auto& e : experiment_registry()) {
        std::cout << e.name << "\n    " << e.description << "\n    required:";
        for (const auto& k : e.required) std::cout << ' ' << k;
        std::cout << '\n';
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Density-of-states measure experiments"};
    app.require_subcommand(1);

    std::string config_path;
    std::uint64_t seed = 0;
    int threads = 0;
    std::string out_dir;
    auto* run = app.add_subcommand("run", "run the experiment described by a JSON config");
    run->add_option("config", config_path, "config file")->required();
    auto* seed_opt = run->add_option("--seed", seed, "master seed (overrides the config)");
    auto* threads_opt = run->add_option("--threads", threads, "worker threads (results do not depend on it)");
    auto* out_opt = run->add_option("--out", out_dir, "output directory");

    app.add_subcommand("list", "list experiments and their required keys");

    std::string kind;
    auto* example = app.add_subcommand("example", "print the minimal config of an experiment");
    example->add_option("kind", kind)->required();

    std::string first, second;
    auto* metric = app.add_subcommand("metric", "bounded-Lipschitz distance between two measure files");
    metric->add_option("first", first)->required();
    metric->add_option("second", second)->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand("list")) {
            print_list();
            return 0;
        }
        if (app.got_subcommand("example")) {
            for (const auto& e : experiment_registry())
                if (e.name == kind) {
                    std::cout << e.minimal_config << '\n';
                    return 0;
                }
            throw InvalidInput("unknown experiment '" + kind + "'");
        }
        if (app.got_subcommand("metric")) {
            const auto a = parse_measure(read_json(first), first);
            const auto b = parse_measure(read_json(second), second);
            std::printf("%.12g\n", bl_distance(a, b));
            return 0;
        }
        RunOptions opt;
        if (*seed_opt) opt.seed = seed;
        if (*threads_opt) opt.threads = threads;
        if (*out_opt) opt.out_dir = out_dir;
        const auto result = run_config(read_json(config_path), opt);
        std::cout << result.report.kind << ": " << to_string(result.report.verdict) << '\n'
                  << result.json_path << '\n'
                  << result.csv_path << '\n';
        for (const auto& note : result.report.notes) std::cerr << "note: " << note << '\n';
        return exit_code(result.report.verdict);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
