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

// Precomputed text embeddings and brute-force cosine search.
//
// Store file (newline-delimited JSON, UTF-8):
//   {"model":"<id>","dim":<int>,"normalized":<bool>}
//   {"key":"<64 hex>","vec":[<floats>]}
//   ...
// The canonical form sorts vector lines by key, prints each float as its
// shortest round-trip decimal and uses no whitespace.

#ifndef NOUNCLASS_EMBEDDING_STORE_HPP_
#define NOUNCLASS_EMBEDDING_STORE_HPP_

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <unordered_map>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "nounclass/io.hpp"
#include "nounclass/text.hpp"

namespace nounclass::embedding {

using text::EmbeddingKey;

class StoreError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A key the caller needed was not in the store.
class MissingKeyError : public StoreError {
 public:
  MissingKeyError(const EmbeddingKey& key, const std::string& what_for)
      : StoreError("no embedding for " + what_for + " (key " + key.hex() + ")"), key_(key) {}
  const EmbeddingKey& key() const { return key_; }

 private:
  EmbeddingKey key_;
};

struct StoreManifest {
  std::string model;
  std::size_t dim = 0;
  bool normalized = false;
};

inline constexpr double kNormTolerance = 1e-4;

class EmbeddingStore {
 public:
  explicit EmbeddingStore(StoreManifest manifest) : manifest_(std::move(manifest)) {
    if (manifest_.dim == 0) throw StoreError("manifest dim must be positive");
  }

  const StoreManifest& manifest() const { return manifest_; }
  std::size_t dim() const { return manifest_.dim; }
  std::size_t size() const { return keys_.size(); }
  bool contains(const EmbeddingKey& key) const { return index_.count(key) != 0; }
  const std::vector<std::string>& warnings() const { return warnings_; }

  /// Adds a vector; an identical duplicate is dropped with a warning, a conflicting one throws.
  void add(const EmbeddingKey& key, std::span<const double> vec) {
    if (vec.size() != manifest_.dim)
      throw StoreError("key " + key.hex() + ": vector has " + std::to_string(vec.size()) + " components, manifest dim is " +
                       std::to_string(manifest_.dim));
    for (double x : vec)
      if (!std::isfinite(x)) throw StoreError("key " + key.hex() + ": non-finite component");
    if (manifest_.normalized) {
      double n = 0;
      for (double x : vec) n += x * x;
      if (std::abs(std::sqrt(n) - 1.0) > kNormTolerance)
        throw StoreError("key " + key.hex() + ": norm " + io::shortest(std::sqrt(n)) + " but manifest declares normalized vectors");
    }
    if (auto it = index_.find(key); it != index_.end()) {
      auto existing = vector(it->second);
      if (!std::equal(existing.begin(), existing.end(), vec.begin()))
        throw StoreError("key " + key.hex() + ": duplicate key with a different vector");
      warnings_.push_back("key " + key.hex() + ": duplicate identical vector dropped");
      return;
    }
    index_.emplace(key, keys_.size());
    keys_.push_back(key);
    data_.insert(data_.end(), vec.begin(), vec.end());
  }

  std::span<const double> at(const EmbeddingKey& key) const {
    auto it = index_.find(key);
    if (it == index_.end()) throw MissingKeyError(key, "key");
    return vector(it->second);
  }

  /// Keys in ascending order.
  std::vector<EmbeddingKey> sorted_keys() const {
    auto k = keys_;
    std::sort(k.begin(), k.end());
    return k;
  }

 private:
  std::span<const double> vector(std::size_t i) const {
    return {data_.data() + i * manifest_.dim, manifest_.dim};
  }

  StoreManifest manifest_;
  std::unordered_map<EmbeddingKey, std::size_t> index_;
  std::vector<EmbeddingKey> keys_;
  std::vector<double> data_;
  std::vector<std::string> warnings_;
};

inline EmbeddingStore parse_store(std::string_view contents) {
  auto lines = io::split_lines(contents);
  if (lines.empty() || lines[0].empty()) throw StoreError("store file has no manifest line");
  StoreManifest m;
  try {
    auto j = nlohmann::json::parse(lines[0]);
    m.model = j.at("model").get<std::string>();
    auto dim = j.at("dim").get<long long>();
    if (dim <= 0) throw StoreError("manifest dim must be positive");
    m.dim = static_cast<std::size_t>(dim);
    m.normalized = j.at("normalized").get<bool>();
  } catch (const nlohmann::json::exception& e) {
    throw StoreError(std::string("malformed manifest line: ") + e.what());
  }
  EmbeddingStore store(m);
  std::vector<double> vec;
  for (std::size_t n = 1; n < lines.size(); ++n) {
    if (lines[n].empty()) continue;
    EmbeddingKey key;
    try {
      auto j = nlohmann::json::parse(lines[n]);
      key = EmbeddingKey::from_hex(j.at("key").get<std::string>());
      const auto& arr = j.at("vec");
      if (!arr.is_array()) throw StoreError("line " + std::to_string(n + 1) + ": vec is not an array");
      vec.clear();
      for (const auto& x : arr) vec.push_back(x.get<double>());
    } catch (const nlohmann::json::exception& e) {
      throw StoreError("store line " + std::to_string(n + 1) + ": " + e.what());
    } catch (const std::invalid_argument& e) {
      throw StoreError("store line " + std::to_string(n + 1) + ": " + e.what());
    }
    store.add(key, vec);
  }
  return store;
}

inline EmbeddingStore load_store(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw StoreError("embedding store not found: " + path.string());
  return parse_store(io::read_file(path));
}

/// Canonical serialization.
inline std::string write_store(const EmbeddingStore& store) {
  std::string out = "{\"model\":" + nlohmann::json(store.manifest().model).dump() +
                    ",\"dim\":" + std::to_string(store.dim()) +
                    ",\"normalized\":" + (store.manifest().normalized ? "true" : "false") + "}\n";
  for (const auto& key : store.sorted_keys()) {
    out += "{\"key\":\"" + key.hex() + "\",\"vec\":[";
    auto v = store.at(key);
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i) out += ',';
      out += io::shortest(v[i]);
    }
    out += "]}\n";
  }
  return out;
}

inline double norm(std::span<const double> v) {
  double s = 0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

inline double dot(std::span<const double> u, std::span<const double> v) {
  double s = 0;
  for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * v[i];
  return s;
}

inline double cosine(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) throw std::invalid_argument("cosine: vectors differ in length");
  const double nu = norm(u), nv = norm(v);
  if (nu == 0.0 || nv == 0.0) throw std::invalid_argument("cosine: zero vector");
  return dot(u, v) / (nu * nv);
}

template <typename CandidateId>
struct SimilarityMatch {
  EmbeddingKey query_key;
  CandidateId candidate_id;
  double score;
};

/// Per query, the best `k` candidates scoring at least `min_score`, ordered by
/// descending score then ascending candidate id. Exhaustive; queries are split
/// across `threads` workers, which does not affect the result.
template <typename QueryId, typename CandidateId>
std::map<QueryId, std::vector<SimilarityMatch<CandidateId>>> top_k_matches(
    const std::vector<std::pair<QueryId, EmbeddingKey>>& queries,
    const std::vector<std::pair<CandidateId, EmbeddingKey>>& candidates, const EmbeddingStore& store, std::size_t k,
    double min_score, unsigned threads = 1) {
  struct Prepared {
    std::span<const double> vec;
    double norm;
  };
  auto prepare = [&](const EmbeddingKey& key, auto&& describe) {
    if (!store.contains(key)) throw MissingKeyError(key, describe());
    auto v = store.at(key);
    double n = norm(v);
    if (n == 0.0) throw StoreError("zero vector for " + describe() + " (key " + key.hex() + ")");
    return Prepared{v, n};
  };
  auto describe_id = [](const auto& id) {
    if constexpr (requires { std::to_string(id); }) return std::to_string(id);
    else return to_string(id);
  };

  std::vector<Prepared> cand;
  cand.reserve(candidates.size());
  for (const auto& [id, key] : candidates) cand.push_back(prepare(key, [&] { return "candidate " + describe_id(id); }));
  std::vector<Prepared> qry;
  qry.reserve(queries.size());
  for (const auto& [id, key] : queries) qry.push_back(prepare(key, [&] { return "query " + describe_id(id); }));

  std::vector<std::vector<SimilarityMatch<CandidateId>>> results(queries.size());
  auto better = [](const SimilarityMatch<CandidateId>& a, const SimilarityMatch<CandidateId>& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.candidate_id < b.candidate_id;
  };
  auto work = [&](std::size_t begin, std::size_t end) {
    std::vector<SimilarityMatch<CandidateId>> heap;
    for (std::size_t q = begin; q < end; ++q) {
      heap.clear();
      if (k == 0) continue;
      for (std::size_t c = 0; c < cand.size(); ++c) {
        double s = dot(qry[q].vec, cand[c].vec) / (qry[q].norm * cand[c].norm);
        if (!(s >= min_score)) continue;
        SimilarityMatch<CandidateId> m{queries[q].second, candidates[c].first, s};
        if (heap.size() < k) {
          heap.push_back(std::move(m));
          std::push_heap(heap.begin(), heap.end(), better);
        } else if (better(m, heap.front())) {
          std::pop_heap(heap.begin(), heap.end(), better);
          heap.back() = std::move(m);
          std::push_heap(heap.begin(), heap.end(), better);
        }
      }
      std::sort_heap(heap.begin(), heap.end(), better);
      results[q] = heap;
    }
  };

  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(1, queries.size()))));
  if (threads == 1) {
    work(0, queries.size());
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (queries.size() + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
      std::size_t b = t * chunk, e = std::min(queries.size(), b + chunk);
      if (b < e) pool.emplace_back(work, b, e);
    }
    for (auto& th : pool) th.join();
  }

  std::map<QueryId, std::vector<SimilarityMatch<CandidateId>>> out;
  for (std::size_t q = 0; q < queries.size(); ++q) out[queries[q].first] = std::move(results[q]);
  return out;
}

}  // namespace nounclass::embedding

#endif  // NOUNCLASS_EMBEDDING_STORE_HPP_
