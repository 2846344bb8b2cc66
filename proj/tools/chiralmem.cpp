// Copyright 2026 The chiralmem Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line driver:
//   chiralmem run --config <file> [--out <dir>] [--preset <name>] [--threads N]
//   chiralmem echo [--config <file>] [--preset <name>]

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>

#include "CLI11.hpp"
#include "chiralmem/runner.hpp"

namespace {

std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw chiralmem::Error("cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

chiralmem::RunConfig load(const std::string& config_path, const std::string& preset) {
    std::optional<chiralmem::RunConfig> base;
    if (!preset.empty()) base = chiralmem::preset_config(preset);
    if (config_path.empty()) {
        if (!base) throw chiralmem::Error("either --config or --preset is required");
        return *base;
    }
    return chiralmem::parse_config(read_file(config_path), base);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Simulate storage and retrieval of light in a chiral giant-atom quantum memory"};
    app.require_subcommand(1);

    std::string config_path, preset, out_dir;
    unsigned threads = 1;

    auto* run = app.add_subcommand("run", "Run an experiment and write CSV/JSON/log outputs");
    run->add_option("--config", config_path, "Configuration file")->check(CLI::ExistingFile);
    run->add_option("--out", out_dir, "Output directory (overrides output_dir)");
    run->add_option("--preset", preset, "Figure preset used as the base configuration")
        ->check(CLI::IsMember(chiralmem::preset_names()));
    run->add_option("--threads", threads, "Worker threads for sweeps")->check(CLI::Range(1u, 1024u));

    auto* echo = app.add_subcommand("echo", "Print the effective configuration and exit");
    echo->add_option("--config", config_path, "Configuration file")->check(CLI::ExistingFile);
    echo->add_option("--preset", preset, "Figure preset")->check(CLI::IsMember(chiralmem::preset_names()));

    CLI11_PARSE(app, argc, argv);

    try {
        chiralmem::RunConfig cfg = load(config_path, preset);
        if (*echo) {
            std::cout << chiralmem::echo_config(cfg);
            return 0;
        }
        if (!out_dir.empty()) cfg.output_dir = out_dir;
        for (const auto& w : cfg.system.to_params().validate()) std::cerr << "warning: " << w << "\n";
        const auto out = chiralmem::execute(cfg, threads);
        chiralmem::write_outputs(out, cfg, cfg.output_dir);
        for (const auto& line : out.log) std::cout << line << "\n";
        std::cout << "wrote " << cfg.output_dir << "\n";
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
