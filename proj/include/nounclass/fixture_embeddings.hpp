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

// Deterministic stand-in embeddings for tests and offline runs.
//
// A text's vector is the normalized sum of one pseudo-random vector per
// distinct word, each seeded from the word's SHA-256. Texts sharing words get
// high cosine similarity; unrelated texts land near zero.

#ifndef NOUNCLASS_FIXTURE_EMBEDDINGS_HPP_
#define NOUNCLASS_FIXTURE_EMBEDDINGS_HPP_

#include <cctype>
#include <cmath>
#include <cstdint>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "nounclass/embedding_store.hpp"
#include "nounclass/io.hpp"
#include "nounclass/text.hpp"

namespace nounclass::fixture {

inline constexpr std::size_t kDefaultDim = 64;
inline constexpr const char* kModelId = "fixture-bow-v1";

/// Lowercase ASCII alphanumeric runs; other bytes separate words.
inline std::set<std::string> words(std::string_view s) {
  std::set<std::string> out;
  std::string cur;
  for (char ch : s) {
    auto c = static_cast<unsigned char>(ch);
    if (std::isalnum(c) || c >= 0x80) {
      cur += static_cast<char>(std::tolower(c));
    } else if (!cur.empty()) {
      out.insert(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.insert(std::move(cur));
  return out;
}

inline std::vector<double> seeded_vector(std::string_view seed_text, std::size_t dim) {
  const std::string h = text::sha256_hex(seed_text);
  std::mt19937_64 rng(std::stoull(h.substr(0, 16), nullptr, 16));
  std::vector<double> v(dim);
  for (auto& x : v) x = 2.0 * io::uniform_unit(rng) - 1.0;
  return v;
}

/// Unit vector for a text. Word-free texts fall back to a vector seeded by the text itself.
inline std::vector<double> embed(std::string_view text, std::size_t dim = kDefaultDim) {
  std::vector<double> v(dim, 0.0);
  auto ws = words(text);
  if (ws.empty()) v = seeded_vector(std::string("text:") + std::string(text), dim);
  for (const auto& w : ws) {
    auto u = seeded_vector("word:" + w, dim);
    for (std::size_t i = 0; i < dim; ++i) v[i] += u[i];
  }
  const double n = embedding::norm(v);
  for (auto& x : v) x /= n;
  return v;
}

/// Builds a store from texts NDJSON (`{"key":..,"text":..}` lines), checking every key against its text.
inline embedding::EmbeddingStore from_texts(std::string_view ndjson, std::size_t dim = kDefaultDim) {
  embedding::EmbeddingStore store({kModelId, dim, true});
  auto lines = io::split_lines(ndjson);
  for (std::size_t n = 0; n < lines.size(); ++n) {
    if (lines[n].empty()) continue;
    auto j = nlohmann::json::parse(lines[n]);
    const auto text_value = j.at("text").get<std::string>();
    const auto key = text::EmbeddingKey::from_hex(j.at("key").get<std::string>());
    if (text::EmbeddingKey::of_text(text_value) != key)
      throw embedding::StoreError("texts line " + std::to_string(n + 1) + ": key does not match text");
    store.add(key, embed(text_value, dim));
  }
  return store;
}

}  // namespace nounclass::fixture

#endif  // NOUNCLASS_FIXTURE_EMBEDDINGS_HPP_
