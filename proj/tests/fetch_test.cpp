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

#include <gtest/gtest.h>

#include <atomic>
#include <thread>

#include "fixtures.hpp"
#include "nounclass/fetch.hpp"
#include "nounclass/lexicon.hpp"

namespace nounclass::fetch {
namespace {

// Serves a two-page category listing with three entries.
class LocalDictionary : public ::testing::Test {
 protected:
  void SetUp() override {
    server_.Get("/dict/category/nouns", [this](const httplib::Request&, httplib::Response& res) {
      ++hits_;
      res.set_content("<a href=\"/dict/entry/yahe\">yahe</a> <a href=\"/dict/entry/kiti\">kiti</a>"
                      "<a rel=\"next\" href=\"/dict/category/nouns?page=2\">next</a>",
                      "text/html");
    });
    server_.Get(R"(/dict/entry/(\w+))", [this](const httplib::Request& req, httplib::Response& res) {
      ++hits_;
      const std::string w = req.matches[1];
      res.set_content("<h2 class=\"headword\">" + w + "</h2><p class=\"sense\">n (ki-/vi-) thing " + w + ".</p>",
                      "text/html");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  void TearDown() override {
    server_.stop();
    thread_.join();
  }
  std::string base() const { return "http://127.0.0.1:" + std::to_string(port_) + "/dict"; }

  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::atomic<int> hits_{0};
};

// The listing handler above ignores the query string, so page 2 repeats page 1;
// pagination must still terminate and entries must not be fetched twice.
TEST_F(LocalDictionary, ColdCacheFetchesEveryPageOnce) {
  fixtures::TempDir tmp;
  auto r = fetch_category_pages(base(), "nouns", tmp.path(), 200.0);
  EXPECT_TRUE(r.errors.empty());
  ASSERT_EQ(r.entries.size(), 2u);
  auto cached = PageCache(tmp.path()).entries();
  EXPECT_EQ(cached.size(), 2u);
  for (const auto& e : cached) {
    auto parsed = lexicon::parse_entry_page(e, {});
    EXPECT_EQ(parsed.records.size(), 1u);
  }
}

TEST_F(LocalDictionary, WarmCacheMakesNoRequests) {
  fixtures::TempDir tmp;
  auto first = fetch_category_pages(base(), "nouns", tmp.path(), 200.0);
  const int after_first = hits_;
  auto second = fetch_category_pages(base(), "nouns", tmp.path(), 200.0);
  EXPECT_EQ(second.network_requests, 0u);
  EXPECT_EQ(hits_, after_first);
  EXPECT_EQ(second.entries.size(), first.entries.size());
}

TEST_F(LocalDictionary, RateLimitSpacesRequests) {
  fixtures::TempDir tmp;
  auto t0 = std::chrono::steady_clock::now();
  auto r = fetch_category_pages(base(), "nouns", tmp.path(), 20.0);  // 50 ms apart
  auto elapsed = std::chrono::steady_clock::now() - t0;
  ASSERT_GE(r.network_requests, 3u);
  EXPECT_GE(elapsed, std::chrono::milliseconds(50 * (r.network_requests - 1)));
}

TEST_F(LocalDictionary, EmptyCategoryWarns) {
  fixtures::TempDir tmp;
  auto r = fetch_category_pages(base(), "verbs", tmp.path(), 200.0);
  EXPECT_TRUE(r.entries.empty());
  EXPECT_EQ(r.errors.size(), 1u);  // 404 listing
  server_.Get("/dict/category/empty", [](const httplib::Request&, httplib::Response& res) {
    res.set_content("<p>nothing here</p>", "text/html");
  });
  auto e = fetch_category_pages(base(), "empty", tmp.path(), 200.0);
  EXPECT_TRUE(e.entries.empty());
  EXPECT_EQ(e.warnings.size(), 1u);
}

TEST(Fetch, UnreachableHostRecordsErrorsAndReturnsNothing) {
  fixtures::TempDir tmp;
  // Port 9 (discard) on localhost is closed in the test environment.
  auto r = fetch_category_pages("http://127.0.0.1:9", "nouns", tmp.path(), 100.0);
  EXPECT_TRUE(r.entries.empty());
  EXPECT_FALSE(r.errors.empty());
}

TEST(Fetch, RejectsNonPositiveRateLimit) {
  fixtures::TempDir tmp;
  EXPECT_THROW(fetch_category_pages("http://127.0.0.1:9", "nouns", tmp.path(), 0.0), std::invalid_argument);
}

TEST(PageCache, FixtureCacheLoadsInUrlOrder) {
  auto entries = PageCache(fixtures::dir() / "cache").entries();
  ASSERT_FALSE(entries.empty());
  EXPECT_TRUE(std::is_sorted(entries.begin(), entries.end(),
                             [](const auto& a, const auto& b) { return a.source_url < b.source_url; }));
}

}  // namespace
}  // namespace nounclass::fetch
