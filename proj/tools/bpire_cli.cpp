/*
 * Copyright (C) 2026 bpire contributors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "bpire/runner.hpp"

int main(int argc, char **argv) {
  CLI::App app{"Simulate branching processes with immigration in a random environment and "
               "check their limit theorems by Monte Carlo"};
  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  app.add_option("--config", config_path, "JSON experiment config")->required();
  app.add_option("--out", out_dir, "output directory for CSVs and manifest.json");
  app.add_option("--seed", seed, "master seed (overrides the config)");
  app.add_option("--threads", threads, "worker threads, 0 = auto (overrides the config)");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    return app.exit(e) == 0 ? 0 : bpire::kExitMalformedConfig;
  }

  bpire::ExperimentConfig config;
  try {
    config = bpire::load_config(config_path);
  } catch (const bpire::ConfigError &e) {
    std::cerr << config_path << ": " << e.what() << "\n";
    return bpire::kExitMalformedConfig;
  } catch (const bpire::IoError &e) {
    std::cerr << e.what() << "\n";
    return bpire::kExitIo;
  }
  if (seed) {
    config.master_seed = *seed;
  }
  if (threads) {
    config.threads = *threads;
  }
  return bpire::run(config, out_dir, std::cout);
}
