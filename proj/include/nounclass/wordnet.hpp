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

// WordNet 3.0 noun taxonomy.
//
// Reads the flat database files (wndb(5WN)): `data.noun` for synsets and
// pointers, `index.noun` for sense numbers. Hypernym (`@`) and instance
// hypernym (`@i`) pointers both become taxonomy edges.

#ifndef NOUNCLASS_WORDNET_HPP_
#define NOUNCLASS_WORDNET_HPP_

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "nounclass/io.hpp"

namespace nounclass::wordnet {

struct SynsetId {
  std::uint32_t offset = 0;
  char pos = 'n';

  friend auto operator<=>(const SynsetId&, const SynsetId&) = default;
};

inline std::string to_string(const SynsetId& id) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%08u-%c", id.offset, id.pos);
  return buf;
}

struct SynsetIdHash {
  std::size_t operator()(const SynsetId& id) const noexcept {
    return std::hash<std::uint64_t>{}((static_cast<std::uint64_t>(id.offset) << 8) | static_cast<unsigned char>(id.pos));
  }
};

struct Synset {
  SynsetId id;
  std::vector<std::string> lemmas;
  std::string gloss;
  std::vector<SynsetId> hypernyms;  // file order
  std::string display_name;         // e.g. "person.n.01"
};

using HypernymPath = std::vector<SynsetId>;

class WordNetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class TaxonomyGraph {
 public:
  /// Appends a synset; call finalize() once all are added.
  void add(Synset s) {
    if (index_.count(s.id)) throw WordNetError("duplicate synset " + to_string(s.id));
    index_.emplace(s.id, synsets_.size());
    synsets_.push_back(std::move(s));
    finalized_ = false;
  }

  /// Checks pointers and acyclicity, then computes roots.
  void finalize() {
    by_name_.clear();
    roots_.clear();
    for (const auto& s : synsets_) {
      for (const auto& h : s.hypernyms)
        if (!index_.count(h)) throw WordNetError("dangling hypernym pointer " + to_string(s.id) + " -> " + to_string(h));
      if (s.hypernyms.empty()) roots_.push_back(s.id);
      if (!s.display_name.empty()) by_name_.emplace(s.display_name, s.id);
    }
    std::sort(roots_.begin(), roots_.end());
    // Kahn's algorithm over child -> hypernym edges.
    std::vector<std::size_t> indegree(synsets_.size(), 0);
    for (const auto& s : synsets_)
      for (const auto& h : s.hypernyms) ++indegree[index_.at(h)];
    std::vector<std::size_t> ready;
    for (std::size_t i = 0; i < synsets_.size(); ++i)
      if (indegree[i] == 0) ready.push_back(i);
    std::size_t visited = 0;
    while (!ready.empty()) {
      std::size_t i = ready.back();
      ready.pop_back();
      ++visited;
      for (const auto& h : synsets_[i].hypernyms)
        if (--indegree[index_.at(h)] == 0) ready.push_back(index_.at(h));
    }
    if (visited != synsets_.size()) throw WordNetError("hypernym relation contains a cycle");
    finalized_ = true;
  }

  std::size_t size() const { return synsets_.size(); }
  bool contains(const SynsetId& id) const { return index_.count(id) != 0; }
  const std::vector<SynsetId>& roots() const { return roots_; }
  const std::vector<Synset>& synsets() const { return synsets_; }

  const Synset& at(const SynsetId& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) throw WordNetError("unknown synset " + to_string(id));
    return synsets_[it->second];
  }

  const Synset& by_name(const std::string& display_name) const {
    auto it = by_name_.find(display_name);
    if (it == by_name_.end()) throw WordNetError("unknown synset " + display_name);
    return at(it->second);
  }

  const std::string& name(const SynsetId& id) const { return at(id).display_name; }

  /// Every path from `id` (inclusive) up to a root (inclusive), depth-first
  /// with hypernyms taken in file order.
  std::vector<HypernymPath> hypernym_paths(const SynsetId& id) const {
    require_finalized();
    at(id);
    std::vector<HypernymPath> out;
    HypernymPath current;
    std::function<void(const SynsetId&)> walk = [&](const SynsetId& node) {
      current.push_back(node);
      const auto& hs = at(node).hypernyms;
      if (hs.empty()) out.push_back(current);
      for (const auto& h : hs) walk(h);
      current.pop_back();
    };
    walk(id);
    return out;
  }

  /// Strict reachability along hypernym edges; is_hyponym_of(a, a) is false.
  bool is_hyponym_of(const SynsetId& a, const SynsetId& b) const {
    require_finalized();
    at(a);
    at(b);
    std::vector<SynsetId> stack(at(a).hypernyms.begin(), at(a).hypernyms.end());
    std::unordered_map<SynsetId, bool, SynsetIdHash> seen;
    while (!stack.empty()) {
      SynsetId n = stack.back();
      stack.pop_back();
      if (n == b) return true;
      if (!seen.emplace(n, true).second) continue;
      for (const auto& h : at(n).hypernyms) stack.push_back(h);
    }
    return false;
  }

 private:
  void require_finalized() const {
    if (!finalized_) throw WordNetError("taxonomy graph used before finalize()");
  }

  std::vector<Synset> synsets_;
  std::unordered_map<SynsetId, std::size_t, SynsetIdHash> index_;
  std::unordered_map<std::string, SynsetId> by_name_;
  std::vector<SynsetId> roots_;
  bool finalized_ = false;
};

namespace detail {

inline std::string lower_ascii(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

template <typename T>
bool parse_num(const std::string& tok, T& out, int base) {
  auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), out, base);
  return ec == std::errc() && p == tok.data() + tok.size();
}

/// Definition part of a gloss: everything before the first `; "` example.
inline std::string gloss_definition(const std::string& gloss) {
  std::string g = gloss;
  if (auto p = g.find("; \""); p != std::string::npos) g.erase(p);
  auto b = g.find_first_not_of(' ');
  auto e = g.find_last_not_of(' ');
  return b == std::string::npos ? std::string() : g.substr(b, e - b + 1);
}

}  // namespace detail

/// lemma -> synset offsets, in sense order.
using SenseIndex = std::unordered_map<std::string, std::vector<std::uint32_t>>;

inline SenseIndex parse_index(std::string_view contents) {
  SenseIndex index;
  auto lines = io::split_lines(contents);
  for (std::size_t n = 0; n < lines.size(); ++n) {
    const auto& line = lines[n];
    if (line.empty() || line[0] == ' ') continue;
    std::istringstream in(line);
    std::vector<std::string> tok;
    for (std::string t; in >> t;) tok.push_back(t);
    auto fail = [&](const std::string& why) {
      return WordNetError("index.noun line " + std::to_string(n + 1) + ": " + why);
    };
    // lemma pos synset_cnt p_cnt [ptr_symbol...] sense_cnt tagsense_cnt offsets...
    if (tok.size() < 6) throw fail("too few fields");
    std::size_t synset_cnt = 0, p_cnt = 0;
    if (!detail::parse_num(tok[2], synset_cnt, 10) || !detail::parse_num(tok[3], p_cnt, 10)) throw fail("bad counts");
    std::size_t first = 4 + p_cnt + 2;
    if (tok.size() != first + synset_cnt) throw fail("field count does not match synset_cnt");
    auto& offsets = index[detail::lower_ascii(tok[0])];
    for (std::size_t i = first; i < tok.size(); ++i) {
      std::uint32_t off = 0;
      if (!detail::parse_num(tok[i], off, 10)) throw fail("bad synset offset '" + tok[i] + "'");
      offsets.push_back(off);
    }
  }
  return index;
}

inline TaxonomyGraph parse_data(std::string_view contents, const SenseIndex& index) {
  TaxonomyGraph graph;
  auto lines = io::split_lines(contents);
  for (std::size_t n = 0; n < lines.size(); ++n) {
    const auto& line = lines[n];
    if (line.empty() || line[0] == ' ') continue;  // license header
    auto fail = [&](const std::string& why) {
      return WordNetError("data.noun line " + std::to_string(n + 1) + ": " + why);
    };
    auto bar = line.find(" | ");
    std::string head = bar == std::string::npos ? line : line.substr(0, bar);
    std::string gloss = bar == std::string::npos ? std::string() : line.substr(bar + 3);
    std::istringstream in(head);
    std::vector<std::string> tok;
    for (std::string t; in >> t;) tok.push_back(t);
    if (tok.size() < 4) throw fail("too few fields");

    Synset s;
    if (!detail::parse_num(tok[0], s.id.offset, 10)) throw fail("bad synset offset '" + tok[0] + "'");
    if (tok[2].size() != 1) throw fail("bad ss_type '" + tok[2] + "'");
    s.id.pos = tok[2][0];
    if (s.id.pos != 'n') throw fail("not a noun synset");
    std::size_t w_cnt = 0;
    if (!detail::parse_num(tok[3], w_cnt, 16) || w_cnt == 0) throw fail("bad w_cnt '" + tok[3] + "'");
    std::size_t i = 4;
    if (tok.size() < i + 2 * w_cnt + 1) throw fail("truncated word list");
    for (std::size_t w = 0; w < w_cnt; ++w, i += 2) s.lemmas.push_back(tok[i]);
    std::size_t p_cnt = 0;
    if (!detail::parse_num(tok[i], p_cnt, 10)) throw fail("bad p_cnt '" + tok[i] + "'");
    ++i;
    if (tok.size() < i + 4 * p_cnt) throw fail("truncated pointer list");
    for (std::size_t p = 0; p < p_cnt; ++p, i += 4) {
      const std::string& sym = tok[i];
      SynsetId target;
      if (!detail::parse_num(tok[i + 1], target.offset, 10)) throw fail("bad pointer offset '" + tok[i + 1] + "'");
      if (tok[i + 2].size() != 1) throw fail("bad pointer pos '" + tok[i + 2] + "'");
      target.pos = tok[i + 2][0];
      if ((sym == "@" || sym == "@i") && target.pos == 'n') s.hypernyms.push_back(target);
    }
    s.gloss = detail::gloss_definition(gloss);

    const std::string lemma = detail::lower_ascii(s.lemmas.front());
    auto it = index.find(lemma);
    if (it == index.end()) throw fail("lemma '" + lemma + "' missing from index.noun");
    auto pos = std::find(it->second.begin(), it->second.end(), s.id.offset);
    if (pos == it->second.end()) throw fail("synset not listed under '" + lemma + "' in index.noun");
    char sense[16];
    std::snprintf(sense, sizeof sense, "%02d", static_cast<int>(pos - it->second.begin()) + 1);
    s.display_name = lemma + ".n." + sense;
    graph.add(std::move(s));
  }
  graph.finalize();
  return graph;
}

inline TaxonomyGraph parse_wordnet(const std::filesystem::path& dir) {
  auto data = dir / "data.noun";
  auto index = dir / "index.noun";
  if (!std::filesystem::exists(data) || !std::filesystem::exists(index))
    throw WordNetError("WordNet directory " + dir.string() + " lacks data.noun/index.noun");
  return parse_data(io::read_file(data), parse_index(io::read_file(index)));
}

}  // namespace nounclass::wordnet

#endif  // NOUNCLASS_WORDNET_HPP_
