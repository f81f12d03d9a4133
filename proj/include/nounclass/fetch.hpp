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

// Category crawler with a write-through page cache.
//
// Cache layout: one UTF-8 file per page named `<sha256(url)>.html`, plus
// `index.tsv` with `hash<TAB>kind<TAB>url` lines (kind is `listing` or
// `entry`), sorted by hash. Category listings link entries as
// `href="/entry/<headword>"` and continue via an anchor carrying
// `rel="next"`.

#ifndef NOUNCLASS_FETCH_HPP_
#define NOUNCLASS_FETCH_HPP_

#include <chrono>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <thread>
#include <vector>

#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include <httplib.h>

#include "nounclass/io.hpp"
#include "nounclass/lexicon.hpp"
#include "nounclass/text.hpp"

namespace nounclass::fetch {

namespace fs = std::filesystem;
using lexicon::RawEntry;

struct FetchError {
  std::string url;
  std::string message;
};

struct FetchResult {
  std::vector<RawEntry> entries;
  std::vector<FetchError> errors;
  std::vector<std::string> warnings;
  std::size_t network_requests = 0;
};

class PageCache {
 public:
  explicit PageCache(fs::path dir) : dir_(std::move(dir)) {
    auto idx = dir_ / "index.tsv";
    if (!fs::exists(idx)) return;
    for (const auto& line : io::split_lines(io::read_file(idx))) {
      if (line.empty()) continue;
      auto t1 = line.find('\t');
      auto t2 = line.find('\t', t1 + 1);
      if (t1 == std::string::npos || t2 == std::string::npos)
        throw std::runtime_error("malformed cache index line: " + line);
      index_[line.substr(0, t1)] = {line.substr(t1 + 1, t2 - t1 - 1), line.substr(t2 + 1)};
    }
  }

  static std::string file_name(const std::string& url) { return text::sha256_hex(url) + ".html"; }

  bool contains(const std::string& url) const { return fs::exists(dir_ / file_name(url)); }

  RawEntry load(const std::string& url) const {
    auto path = dir_ / file_name(url);
    RawEntry e{url, io::read_file(path), {}};
    auto ftime = fs::last_write_time(path);
    e.fetched_at = std::chrono::time_point_cast<std::chrono::system_clock::duration>(
        ftime - fs::file_time_type::clock::now() + std::chrono::system_clock::now());
    return e;
  }

  void store(const std::string& url, const std::string& kind, const std::string& body) {
    fs::create_directories(dir_);
    io::atomic_write(dir_ / file_name(url), body);
    index_[text::sha256_hex(url)] = {kind, url};
    std::string idx;
    for (const auto& [hash, ku] : index_) idx += hash + "\t" + ku.first + "\t" + ku.second + "\n";
    io::atomic_write(dir_ / "index.tsv", idx);
  }

  /// Every cached entry page, in URL order.
  std::vector<RawEntry> entries() const {
    std::vector<std::string> urls;
    for (const auto& [hash, ku] : index_)
      if (ku.first == "entry") urls.push_back(ku.second);
    std::sort(urls.begin(), urls.end());
    std::vector<RawEntry> out;
    for (const auto& u : urls) out.push_back(load(u));
    return out;
  }

  const fs::path& dir() const { return dir_; }

 private:
  fs::path dir_;
  std::map<std::string, std::pair<std::string, std::string>> index_;
};

namespace detail {

inline std::vector<std::string> hrefs(const std::string& html, bool next_only) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while ((pos = html.find("<a ", pos)) != std::string::npos) {
    auto end = html.find('>', pos);
    if (end == std::string::npos) break;
    std::string tag = html.substr(pos, end - pos);
    pos = end;
    bool is_next = tag.find("rel=\"next\"") != std::string::npos;
    if (is_next != next_only) continue;
    auto h = tag.find("href=\"");
    if (h == std::string::npos) continue;
    auto q = tag.find('"', h + 6);
    if (q == std::string::npos) continue;
    out.push_back(tag.substr(h + 6, q - h - 6));
  }
  return out;
}

}  // namespace detail

/// Crawls `<base_url>/category/<category>` and all its entry pages. Cached
/// pages (listings included) are never refetched.
inline FetchResult fetch_category_pages(const std::string& base_url, const std::string& category,
                                        const fs::path& cache_dir, double rate_limit) {
  if (!(rate_limit > 0)) throw std::invalid_argument("rate_limit must be > 0");
  fs::create_directories(cache_dir);
  PageCache cache(cache_dir);
  FetchResult result;

  std::string origin = base_url;
  while (!origin.empty() && origin.back() == '/') origin.pop_back();
  std::string prefix;
  if (auto scheme = origin.find("://"); scheme != std::string::npos) {
    if (auto slash = origin.find('/', scheme + 3); slash != std::string::npos) {
      prefix = origin.substr(slash);
      origin.erase(slash);
    }
  }
  httplib::Client client(origin);
  client.set_connection_timeout(5);
  client.set_read_timeout(15);
  client.set_follow_location(true);

  const auto interval = std::chrono::duration<double>(1.0 / rate_limit);
  auto last_request = std::chrono::steady_clock::time_point{};

  auto get = [&](const std::string& path, const std::string& kind) -> std::optional<std::string> {
    const std::string url = origin + path;
    if (cache.contains(url)) return cache.load(url).body;
    auto wait = last_request + std::chrono::duration_cast<std::chrono::steady_clock::duration>(interval);
    if (result.network_requests > 0) std::this_thread::sleep_until(wait);
    last_request = std::chrono::steady_clock::now();
    ++result.network_requests;
    auto res = client.Get(path);
    if (!res) {
      result.errors.push_back({url, "request failed: " + httplib::to_string(res.error())});
      return std::nullopt;
    }
    if (res->status != 200 || res->body.empty()) {
      result.errors.push_back({url, "HTTP " + std::to_string(res->status)});
      return std::nullopt;
    }
    cache.store(url, kind, res->body);
    return res->body;
  };

  auto to_path = [&](const std::string& href) -> std::optional<std::string> {
    if (href.starts_with(origin)) return href.substr(origin.size());
    if (href.starts_with("/")) return href;
    return std::nullopt;
  };

  std::vector<std::string> entry_paths;
  std::set<std::string> seen_listings;
  std::optional<std::string> listing = prefix + "/category/" + category;
  while (listing && seen_listings.insert(*listing).second) {
    auto body = get(*listing, "listing");
    if (!body) break;
    for (const auto& href : detail::hrefs(*body, false))
      if (auto p = to_path(href); p && p->find("/entry/") != std::string::npos) entry_paths.push_back(*p);
    listing.reset();
    for (const auto& href : detail::hrefs(*body, true))
      if (auto p = to_path(href)) { listing = *p; break; }
  }

  std::set<std::string> done;
  for (const auto& p : entry_paths) {
    if (!done.insert(p).second) continue;
    if (get(p, "entry")) result.entries.push_back(cache.load(origin + p));
  }
  if (entry_paths.empty() && result.errors.empty())
    result.warnings.push_back("category '" + category + "' lists no entries");
  return result;
}

}  // namespace nounclass::fetch

#endif  // NOUNCLASS_FETCH_HPP_
