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

// Writes a deterministic stand-in embedding store for a texts file.

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "nounclass/fixture_embeddings.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Deterministic fixture embeddings"};
  std::string in, out;
  std::size_t dim = nounclass::fixture::kDefaultDim;
  app.add_option("--in", in, "texts NDJSON")->required()->check(CLI::ExistingFile);
  app.add_option("--out", out, "Store file to write")->required();
  app.add_option("--dim", dim, "Vector dimension")->check(CLI::PositiveNumber);
  CLI11_PARSE(app, argc, argv);
  try {
    auto store = nounclass::fixture::from_texts(nounclass::io::read_file(in), dim);
    nounclass::io::atomic_write(out, nounclass::embedding::write_store(store));
    std::cerr << "wrote " << store.size() << " vectors to " << out << "\n";
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
