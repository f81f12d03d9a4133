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

#include <cstdio>
#include <nlohmann/json.hpp>
#include <sstream>

#include "fixtures.hpp"
#include "nounclass/embedding_store.hpp"
#include "nounclass/fixture_embeddings.hpp"
#include "nounclass/lexicon.hpp"
#include "nounclass/pipeline.hpp"
#include "synthetic.hpp"

namespace nounclass::pipeline {
namespace {

using fixtures::quote;
using fixtures::run_cli;
using fixtures::TempDir;

std::string fixture_conf() { return "--config " + quote(fixtures::dir() / "pipeline.conf"); }

TEST(Config, DefaultsAreTheDocumentedOnes) {
  PipelineConfig c;
  EXPECT_EQ(c.top_k, 10u);
  EXPECT_DOUBLE_EQ(c.min_score, 0.5);
  EXPECT_EQ(c.min_global_occurrences, 10u);
  EXPECT_EQ(c.top_n, 20u);
  EXPECT_DOUBLE_EQ(c.bold_threshold, 1.0);
  EXPECT_EQ(c.top_classes, 9u);
  EXPECT_DOUBLE_EQ(c.train_fraction, 0.75);
  EXPECT_NO_THROW(c.validate());
}

TEST(Config, ParsesFileAndResolvesRelativePaths) {
  auto settings = PipelineConfig::parse_file("# comment\n\nmodel.top_k = 5\npaths.wordnet_dir = wn\n");
  ASSERT_EQ(settings.size(), 2u);
  PipelineConfig c;
  c.apply(settings, "/base");
  EXPECT_EQ(c.top_k, 5u);
  EXPECT_EQ(c.wordnet_dir, std::filesystem::path("/base/wn"));
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
  PipelineConfig c;
  auto code = [&](std::vector<std::pair<std::string, std::string>> s) {
    try {
      c.apply(s, "/");
      c.validate();
    } catch (const PipelineError& e) {
      return static_cast<int>(e.code());
    }
    return 0;
  };
  EXPECT_EQ(code({{"model.topk", "5"}}), kUsage);
  EXPECT_EQ(code({{"model.top_k", "five"}}), kUsage);
  EXPECT_EQ(code({{"model.min_score", "1.5"}}), kUsage);
  EXPECT_EQ(code({{"model.min_score", "0.5"}, {"model.top_k", "0"}}), kUsage);
  EXPECT_EQ(code({{"model.top_k", "3"}, {"model.occurrences", "synsets"}}), kUsage);
  EXPECT_THROW(PipelineConfig::parse_file("no equals sign"), PipelineError);
}

TEST(SoftCheck, WarnsOnlyWhenHumanClassIsNotTop) {
  using lexicon::ClassLabel;
  using lexicon::Concord;
  std::map<ClassLabel, double> top{{ClassLabel(Concord::AWa), 0.10}, {ClassLabel(Concord::U), 0.05}};
  std::map<ClassLabel, double> beaten{{ClassLabel(Concord::AWa), 0.02}, {ClassLabel(Concord::U), 0.05}};
  EXPECT_TRUE(cohesion_soft_checks(top).empty());
  EXPECT_EQ(cohesion_soft_checks(beaten).size(), 1u);
}

TEST(Cli, OfflineWithEmptyCacheExitsTwo) {
  TempDir tmp;
  std::filesystem::create_directories(tmp.path() / "cache");
  EXPECT_EQ(run_cli("ingest --offline --cache-dir " + quote(tmp.path() / "cache") + " --out " + quote(tmp.path() / "out"),
                    tmp.path() / "log"),
            kMissingInput);
  EXPECT_FALSE(std::filesystem::exists(tmp.path() / "out" / "records.ndjson"));
}

TEST(Cli, UsageErrorsExitOne) {
  TempDir tmp;
  EXPECT_EQ(run_cli("", tmp.path() / "log"), kUsage);
  EXPECT_EQ(run_cli("frobnicate", tmp.path() / "log"), kUsage);
  EXPECT_EQ(run_cli("model --set model.nope=1 --out " + quote(tmp.path()), tmp.path() / "log"), kUsage);
}

TEST(Cli, ModelWithoutRecordsExitsTwo) {
  TempDir tmp;
  EXPECT_EQ(run_cli("model " + fixture_conf() + " --out " + quote(tmp.path() / "out"), tmp.path() / "log"),
            kMissingInput);
}

TEST(Cli, LockedOutputDirectoryIsRefused) {
  TempDir tmp;
  auto out = tmp.path() / "out";
  std::filesystem::create_directories(out);
  io::atomic_write(out / ".nounclass.lock", "");
  EXPECT_EQ(run_cli("ingest " + fixture_conf() + " --out " + quote(out), tmp.path() / "log"), kUsage);
  EXPECT_NE(io::read_file(tmp.path() / "log").find("locked"), std::string::npos);
}

TEST(Cli, IngestWritesRecordsDistributionAndWarnings) {
  TempDir tmp;
  auto out = tmp.path() / "out";
  ASSERT_EQ(run_cli("ingest " + fixture_conf() + " --out " + quote(out), tmp.path() / "log"), kOk);
  auto records = lexicon::from_ndjson(io::read_file(out / "records.ndjson"));
  EXPECT_EQ(records.size(), 32u);  // 33 fixture records less the one-off xx- class
  EXPECT_EQ(io::read_file(out / "class_distribution.csv").substr(0, 45),
            "subject_concord,nominal_class,count,retained\n");
  EXPECT_NE(io::read_file(out / "parse_warnings.log").find("unknown-concord"), std::string::npos);
  auto manifest = nlohmann::json::parse(io::read_file(out / "manifest.json"));
  EXPECT_EQ(manifest["inputs"]["cache"].get<std::string>().size(), 64u);
  EXPECT_EQ(manifest["config"]["ingest.top_classes"], 5);
  EXPECT_FALSE(std::filesystem::exists(out / ".nounclass.lock"));
}

// Two records and three synsets with distinct texts; one record repeats another's definition.
struct TinyInputs {
  TempDir tmp;
  std::filesystem::path out = tmp.path() / "out", wn = tmp.path() / "wn";
  TinyInputs() {
    std::filesystem::create_directories(out);
    std::filesystem::create_directories(wn);
    io::atomic_write(out / "records.ndjson",
                     lexicon::to_ndjson({{0, "mtu", "A  Human being", lexicon::ClassLabel(lexicon::Concord::AWa)},
                                         {1, "kiti", "chair", lexicon::ClassLabel(lexicon::Concord::KiVi)},
                                         {2, "mja", "a human being", lexicon::ClassLabel(lexicon::Concord::AWa)}}));
    io::atomic_write(wn / "data.noun",
                     "00000000 03 n 01 entity 0 000 | that which exists\n"
                     "00000050 03 n 01 person 0 001 @ 00000000 n 0000 | a person\n"
                     "00000120 03 n 01 chair 0 001 @ 00000000 n 0000 | a seat for one\n");
    io::atomic_write(wn / "index.noun",
                     "chair n 1 0 1 0 00000120\nentity n 1 0 1 0 00000000\nperson n 1 0 1 0 00000050\n");
  }
  std::string args() const { return "--wordnet-dir " + quote(wn) + " --out " + quote(out); }
};

TEST(Cli, TextsAreUniqueSortedAndKeyedByHash) {
  TinyInputs in;
  ASSERT_EQ(run_cli("texts " + in.args(), in.tmp.path() / "log"), kOk);
  auto lines = io::split_lines(io::read_file(in.out / "texts.ndjson"));
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  ASSERT_EQ(lines.size(), 5u);  // "a human being" appears once
  std::string prev;
  for (const auto& l : lines) {
    auto j = nlohmann::json::parse(l);
    const std::string key = j["key"], text = j["text"];
    EXPECT_LT(prev, key);
    prev = key;
    // Recompute the hash with coreutils.
    io::atomic_write(in.tmp.path() / "t", text);
    std::string cmd = "sha256sum " + quote(in.tmp.path() / "t");
    std::unique_ptr<FILE, int (*)(FILE*)> p(popen(cmd.c_str(), "r"), pclose);
    char buf[65] = {};
    ASSERT_EQ(std::fread(buf, 1, 64, p.get()), 64u);
    EXPECT_EQ(key, std::string(buf));
  }
}

TEST(Cli, CoverageGapExitsThreeAndNamesKey) {
  TinyInputs in;
  ASSERT_EQ(run_cli("texts " + in.args(), in.tmp.path() / "log"), kOk);
  auto texts = io::read_file(in.out / "texts.ndjson");
  auto store = fixture::from_texts(texts);
  // Drop the "a seat for one" gloss.
  const auto missing = text::EmbeddingKey::of_text("a seat for one");
  embedding::EmbeddingStore partial(store.manifest());
  for (const auto& k : store.sorted_keys())
    if (k != missing) partial.add(k, store.at(k));
  io::atomic_write(in.tmp.path() / "emb.jsonl", embedding::write_store(partial));
  EXPECT_EQ(run_cli("model " + in.args() + " --embeddings " + quote(in.tmp.path() / "emb.jsonl"), in.tmp.path() / "log"),
            kCoverageGap);
  EXPECT_NE(io::read_file(in.tmp.path() / "log").find(missing.hex()), std::string::npos);
}

TEST(Cli, CommittedFixtureStoreMatchesGenerator) {
  TempDir tmp;
  auto out = tmp.path() / "out";
  ASSERT_EQ(run_cli("ingest " + fixture_conf() + " --out " + quote(out), tmp.path() / "log"), kOk);
  ASSERT_EQ(run_cli("texts " + fixture_conf() + " --out " + quote(out), tmp.path() / "log"), kOk);
  auto regenerated = embedding::write_store(fixture::from_texts(io::read_file(out / "texts.ndjson")));
  EXPECT_EQ(regenerated, io::read_file(fixtures::dir() / "embeddings.jsonl"))
      << "regenerate with: fixture_embed --in texts.ndjson --out tests/fixtures/embeddings.jsonl";
}

TEST(Cli, AllOnFixturesWritesEveryReport) {
  TempDir tmp;
  auto out = tmp.path() / "out";
  ASSERT_EQ(run_cli("all " + fixture_conf() + " --out " + quote(out), tmp.path() / "log"), kOk)
      << io::read_file(tmp.path() / "log");
  for (auto f : {"records.ndjson", "class_distribution.csv", "parse_warnings.log", "texts.ndjson", "matches.ndjson",
                 "cohesion.csv", "descriptors.csv", "descriptors.md", "run_summary.json", "eval_report.json",
                 "confusion.csv", "eval_report.md", "manifest.json"})
    EXPECT_TRUE(std::filesystem::exists(out / f)) << f;
  auto summary = nlohmann::json::parse(io::read_file(out / "run_summary.json"));
  EXPECT_EQ(summary["cohesion"].size(), 5u);
  EXPECT_TRUE(summary.contains("total_dependency_shannons"));
  auto report = nlohmann::json::parse(io::read_file(out / "eval_report.json"));
  EXPECT_TRUE(report.contains("baseline"));
  EXPECT_NE(io::read_file(out / "eval_report.md").find("weighted random"), std::string::npos);
  auto manifest = nlohmann::json::parse(io::read_file(out / "manifest.json"));
  for (auto stage : {"ingest", "texts", "model", "eval"}) EXPECT_TRUE(manifest["stages"].contains(stage)) << stage;
  for (auto input : {"cache", "corrections", "records", "wordnet/data.noun", "wordnet/index.noun", "embeddings"})
    EXPECT_TRUE(manifest["inputs"].contains(input)) << input;
}

// Separable synthetic embeddings behind real records: the eval command must
// report a high macro F1 and identical bytes on a rerun.
TEST(Cli, EvalOnSeparableDataIsAccurateAndStable) {
  TempDir tmp;
  auto out = tmp.path() / "out";
  std::filesystem::create_directories(out);
  const std::vector<lexicon::ClassLabel> labels = {lexicon::ClassLabel(lexicon::Concord::AWa),
                                                   lexicon::ClassLabel(lexicon::Concord::IZi),
                                                   lexicon::ClassLabel(lexicon::Concord::KiVi)};
  auto ex = synthetic::blobs(240, 3, 8, 17);
  std::vector<lexicon::LexicalRecord> records;
  embedding::EmbeddingStore store({"synthetic", 8, false});
  for (std::size_t i = 0; i < ex.size(); ++i) {
    records.push_back({i, "w" + std::to_string(i), "definition " + std::to_string(i), labels[ex.y[i]]});
    store.add(text::EmbeddingKey::of_text(text::keying_form(records.back().definition)), ex.row(i));
  }
  io::atomic_write(out / "records.ndjson", lexicon::to_ndjson(records));
  io::atomic_write(tmp.path() / "emb.jsonl", embedding::write_store(store));
  const std::string args = "eval --out " + quote(out) + " --embeddings " + quote(tmp.path() / "emb.jsonl");
  ASSERT_EQ(run_cli(args, tmp.path() / "log"), kOk) << io::read_file(tmp.path() / "log");
  const auto first = io::read_file(out / "eval_report.json");
  auto report = nlohmann::json::parse(first);
  EXPECT_GE(report["model"]["macro_f1"].get<double>(), 0.95);
  EXPECT_EQ(report["split"]["train"], 180);
  ASSERT_EQ(run_cli(args, tmp.path() / "log"), kOk);
  EXPECT_EQ(io::read_file(out / "eval_report.json"), first);
}

}  // namespace
}  // namespace nounclass::pipeline
