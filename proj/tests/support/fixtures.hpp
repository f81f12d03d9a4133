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

#ifndef NOUNCLASS_TESTS_FIXTURES_HPP_
#define NOUNCLASS_TESTS_FIXTURES_HPP_

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <map>
#include <random>
#include <string>

#include "nounclass/io.hpp"
#include "nounclass/wordnet.hpp"

namespace fixtures {

namespace fs = std::filesystem;

inline fs::path dir() { return NOUNCLASS_FIXTURE_DIR; }
inline fs::path cli() { return NOUNCLASS_CLI; }

inline nounclass::wordnet::TaxonomyGraph mini_wordnet() { return nounclass::wordnet::parse_wordnet(dir() / "wordnet"); }

/// s -> a, s -> b, a -> r, b -> r.
struct Diamond {
  nounclass::wordnet::SynsetId s{40, 'n'}, a{30, 'n'}, b{20, 'n'}, r{10, 'n'};
  nounclass::wordnet::TaxonomyGraph graph;
  Diamond() {
    auto add = [&](nounclass::wordnet::SynsetId id, const std::string& name,
                   std::vector<nounclass::wordnet::SynsetId> up) {
      graph.add({id, {name}, name + " gloss", std::move(up), name + ".n.01"});
    };
    add(r, "r", {});
    add(a, "a", {r});
    add(b, "b", {r});
    add(s, "s", {a, b});
    graph.finalize();
  }
};

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = fs::temp_directory_path() / ("nounclass-test-" + std::to_string(rd()) + std::to_string(rd()));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

/// Runs the CLI with `args` (already shell-quoted) and returns its exit code. Output goes to `log`.
inline int run_cli(const std::string& args, const fs::path& log, const std::string& env = "") {
  std::string cmd = env + (env.empty() ? "" : " ") + "'" + cli().string() + "' " + args + " > '" + log.string() + "' 2>&1";
  int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

/// Every regular file under `root`, relative path -> contents.
inline std::map<std::string, std::string> tree(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file()) out[fs::relative(e.path(), root).string()] = nounclass::io::read_file(e.path());
  return out;
}

inline std::string quote(const fs::path& p) { return "'" + p.string() + "'"; }

}  // namespace fixtures

#endif  // NOUNCLASS_TESTS_FIXTURES_HPP_
