// Copyright 2026 The nounclass Authors.
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

#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "nounclass/pipeline.hpp"

namespace pl = nounclass::pipeline;

int main(int argc, char** argv) {
  CLI::App app{"Swahili noun class semantics pipeline"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", pl::kToolVersion);

  std::string config_file, out_dir, cache_dir, corrections, wordnet_dir, embeddings;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> top_classes;
  bool offline = false;
  std::vector<std::string> sets;

  app.add_option("--config", config_file, "Settings file of key = value lines")->check(CLI::ExistingFile);
  app.add_option("--out", out_dir, "Output directory");
  app.add_option("--seed", seed, "Seed for the split, training and baseline");
  app.add_flag("--offline", offline, "Use the page cache only");
  app.add_option("--cache-dir", cache_dir, "Dictionary page cache");
  app.add_option("--corrections", corrections, "Correction table (TSV)");
  app.add_option("--top-k", top_classes, "Number of concord classes to keep (default 9)");
  app.add_option("--wordnet-dir", wordnet_dir, "Directory holding data.noun and index.noun");
  app.add_option("--embeddings", embeddings, "Embedding store (NDJSON)");
  app.add_option("--set", sets, "Override a setting, e.g. --set model.top_k=5");

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"ingest", "Parse cached (or fetched) dictionary pages into records"},
      {"texts", "List the texts that need embeddings"},
      {"model", "Match records to synsets and score descriptors"},
      {"eval", "Train and evaluate the class predictor"},
      {"all", "Run ingest, texts, model and eval"}};
  for (const auto& [name, help] : commands) app.add_subcommand(name, help);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : pl::kUsage;
  }

  try {
    std::vector<std::pair<std::string, std::string>> overrides;
    for (const auto& s : sets) {
      auto eq = s.find('=');
      if (eq == std::string::npos) throw pl::PipelineError(pl::kUsage, "--set expects key=value, got '" + s + "'");
      overrides.emplace_back(s.substr(0, eq), s.substr(eq + 1));
    }
    if (!out_dir.empty()) overrides.emplace_back("paths.out_dir", out_dir);
    if (!cache_dir.empty()) overrides.emplace_back("paths.cache_dir", cache_dir);
    if (!corrections.empty()) overrides.emplace_back("paths.corrections", corrections);
    if (!wordnet_dir.empty()) overrides.emplace_back("paths.wordnet_dir", wordnet_dir);
    if (!embeddings.empty()) overrides.emplace_back("paths.embeddings", embeddings);
    if (seed) overrides.emplace_back("seed", std::to_string(*seed));
    if (top_classes) overrides.emplace_back("ingest.top_classes", std::to_string(*top_classes));
    if (offline) overrides.emplace_back("ingest.offline", "true");

    auto cfg = pl::PipelineConfig::load(config_file.empty() ? std::nullopt : std::optional<std::filesystem::path>(config_file),
                                        overrides);
    pl::run(app.get_subcommands().front()->get_name(), cfg, std::cerr);
    return pl::kOk;
  } catch (const pl::PipelineError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return pl::kInvariant;
  }
}
