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

// End-to-end pipeline stages behind the `nounclass` command line tool.
//
// Exit codes: 0 success, 1 usage error, 2 missing input, 3 embedding
// coverage gap, 4 internal invariant violation.

#ifndef NOUNCLASS_PIPELINE_HPP_
#define NOUNCLASS_PIPELINE_HPP_

#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "nounclass/classifier.hpp"
#include "nounclass/embedding_store.hpp"
#include "nounclass/fetch.hpp"
#include "nounclass/io.hpp"
#include "nounclass/lexicon.hpp"
#include "nounclass/taxonomy.hpp"
#include "nounclass/text.hpp"
#include "nounclass/wordnet.hpp"

namespace nounclass::pipeline {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

inline constexpr const char* kToolVersion = "0.1.0";

enum ExitCode : int { kOk = 0, kUsage = 1, kMissingInput = 2, kCoverageGap = 3, kInvariant = 4 };

class PipelineError : public std::runtime_error {
 public:
  PipelineError(ExitCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ExitCode code() const { return code_; }

 private:
  ExitCode code_;
};

// ---------------------------------------------------------------------------
// Configuration

/// Flat `key = value` settings. Relative paths resolve against the config
/// file's directory. Unknown keys are rejected.
struct PipelineConfig {
  // paths
  fs::path cache_dir = "cache";
  fs::path corrections;
  fs::path wordnet_dir = "wordnet";
  fs::path embeddings = "embeddings.jsonl";
  fs::path out_dir = "out";
  // ingest
  std::string base_url;
  std::string category = "nouns";
  double rate_limit = 1.0;
  bool offline = false;
  std::size_t top_classes = 9;
  std::string ya_class = "6?";
  // model
  std::size_t top_k = 10;
  double min_score = 0.5;
  std::size_t min_global_occurrences = 10;
  taxonomy::OccurrenceMode occurrences = taxonomy::OccurrenceMode::Records;
  bool include_matched = true;
  std::size_t top_n = 20;
  double bold_threshold = 1.0;
  unsigned threads = 1;
  // classifier
  double train_fraction = 0.75;
  std::size_t epochs = 300;
  double learning_rate = 0.5;
  double l2 = 1e-4;
  std::size_t batch_size = 0;
  std::size_t repetitions = 3;
  std::size_t baseline_trials = 1000;
  std::uint64_t seed = 0;

  using Setter = std::function<void(PipelineConfig&, const std::string&, const fs::path&)>;

  static const std::map<std::string, Setter>& setters() {
    static const std::map<std::string, Setter> table = [] {
      std::map<std::string, Setter> t;
      auto path = [](fs::path PipelineConfig::*m) {
        return [m](PipelineConfig& c, const std::string& v, const fs::path& base) {
          fs::path p(v);
          c.*m = p.is_relative() && !v.empty() ? base / p : p;
        };
      };
      auto str = [](std::string PipelineConfig::*m) {
        return [m](PipelineConfig& c, const std::string& v, const fs::path&) { c.*m = v; };
      };
      auto real = [](double PipelineConfig::*m) {
        return [m](PipelineConfig& c, const std::string& v, const fs::path&) { c.*m = parse_real(v); };
      };
      auto count = [](std::size_t PipelineConfig::*m) {
        return [m](PipelineConfig& c, const std::string& v, const fs::path&) { c.*m = parse_count(v); };
      };
      auto flag = [](bool PipelineConfig::*m) {
        return [m](PipelineConfig& c, const std::string& v, const fs::path&) { c.*m = parse_bool(v); };
      };
      t["paths.cache_dir"] = path(&PipelineConfig::cache_dir);
      t["paths.corrections"] = path(&PipelineConfig::corrections);
      t["paths.wordnet_dir"] = path(&PipelineConfig::wordnet_dir);
      t["paths.embeddings"] = path(&PipelineConfig::embeddings);
      t["paths.out_dir"] = path(&PipelineConfig::out_dir);
      t["ingest.base_url"] = str(&PipelineConfig::base_url);
      t["ingest.category"] = str(&PipelineConfig::category);
      t["ingest.rate_limit"] = real(&PipelineConfig::rate_limit);
      t["ingest.offline"] = flag(&PipelineConfig::offline);
      t["ingest.top_classes"] = count(&PipelineConfig::top_classes);
      t["ingest.ya_class"] = str(&PipelineConfig::ya_class);
      t["model.top_k"] = count(&PipelineConfig::top_k);
      t["model.min_score"] = real(&PipelineConfig::min_score);
      t["model.min_global_occurrences"] = count(&PipelineConfig::min_global_occurrences);
      t["model.occurrences"] = [](PipelineConfig& c, const std::string& v, const fs::path&) {
        if (v == "records") c.occurrences = taxonomy::OccurrenceMode::Records;
        else if (v == "paths") c.occurrences = taxonomy::OccurrenceMode::Paths;
        else throw std::invalid_argument("expected 'records' or 'paths'");
      };
      t["model.include_matched"] = flag(&PipelineConfig::include_matched);
      t["model.top_n"] = count(&PipelineConfig::top_n);
      t["model.bold_threshold"] = real(&PipelineConfig::bold_threshold);
      t["model.threads"] = [](PipelineConfig& c, const std::string& v, const fs::path&) {
        c.threads = static_cast<unsigned>(parse_count(v));
      };
      t["classifier.train_fraction"] = real(&PipelineConfig::train_fraction);
      t["classifier.epochs"] = count(&PipelineConfig::epochs);
      t["classifier.learning_rate"] = real(&PipelineConfig::learning_rate);
      t["classifier.l2"] = real(&PipelineConfig::l2);
      t["classifier.batch_size"] = count(&PipelineConfig::batch_size);
      t["classifier.repetitions"] = count(&PipelineConfig::repetitions);
      t["classifier.baseline_trials"] = count(&PipelineConfig::baseline_trials);
      t["seed"] = [](PipelineConfig& c, const std::string& v, const fs::path&) { c.seed = parse_count(v); };
      return t;
    }();
    return table;
  }

  /// Applies `key = value` settings in order; later settings win.
  void apply(const std::vector<std::pair<std::string, std::string>>& settings, const fs::path& base) {
    for (const auto& [key, value] : settings) {
      auto it = setters().find(key);
      if (it == setters().end()) throw PipelineError(kUsage, "unknown config key '" + key + "'");
      try {
        it->second(*this, value, base);
      } catch (const std::invalid_argument& e) {
        throw PipelineError(kUsage, "config key '" + key + "': invalid value '" + value + "' (" + e.what() + ")");
      }
      snapshot_[key] = value;
    }
  }

  static std::vector<std::pair<std::string, std::string>> parse_file(std::string_view contents) {
    std::vector<std::pair<std::string, std::string>> out;
    auto lines = io::split_lines(contents);
    for (std::size_t n = 0; n < lines.size(); ++n) {
      std::string line = text::trim(lines[n]);
      if (line.empty() || line[0] == '#') continue;
      auto eq = line.find('=');
      if (eq == std::string::npos)
        throw PipelineError(kUsage, "config line " + std::to_string(n + 1) + ": expected key = value");
      out.emplace_back(text::trim(std::string_view(line).substr(0, eq)), text::trim(std::string_view(line).substr(eq + 1)));
    }
    return out;
  }

  static PipelineConfig load(const std::optional<fs::path>& file,
                             const std::vector<std::pair<std::string, std::string>>& overrides) {
    PipelineConfig cfg;
    if (file) {
      if (!fs::exists(*file)) throw PipelineError(kMissingInput, "config file not found: " + file->string());
      cfg.apply(parse_file(io::read_file(*file)), fs::absolute(*file).parent_path());
    }
    cfg.apply(overrides, fs::current_path());
    return cfg;
  }

  /// Thresholds are checked for every command; paths only where needed.
  void validate() const {
    auto positive = [](bool ok, const char* what) {
      if (!ok) throw PipelineError(kUsage, std::string("config: ") + what);
    };
    positive(rate_limit > 0, "ingest.rate_limit must be > 0");
    positive(top_classes >= 1, "ingest.top_classes must be >= 1");
    positive(top_k >= 1, "model.top_k must be >= 1");
    positive(min_score > 0 && min_score <= 1, "model.min_score must be in (0, 1]");
    positive(min_global_occurrences >= 1, "model.min_global_occurrences must be >= 1");
    positive(top_n >= 1, "model.top_n must be >= 1");
    positive(bold_threshold > 0, "model.bold_threshold must be > 0");
    positive(threads >= 1, "model.threads must be >= 1");
    positive(train_fraction > 0 && train_fraction < 1, "classifier.train_fraction must be in (0, 1)");
    positive(learning_rate > 0, "classifier.learning_rate must be > 0");
    positive(l2 >= 0, "classifier.l2 must be >= 0");
    positive(repetitions >= 1, "classifier.repetitions must be >= 1");
    positive(baseline_trials >= 1, "classifier.baseline_trials must be >= 1");
    positive(!out_dir.empty(), "paths.out_dir must be set");
  }

  /// Effective settings, every key, as strings.
  ordered_json snapshot() const {
    ordered_json j;
    j["paths.cache_dir"] = cache_dir.string();
    j["paths.corrections"] = corrections.string();
    j["paths.wordnet_dir"] = wordnet_dir.string();
    j["paths.embeddings"] = embeddings.string();
    j["paths.out_dir"] = out_dir.string();
    j["ingest.base_url"] = base_url;
    j["ingest.category"] = category;
    j["ingest.rate_limit"] = rate_limit;
    j["ingest.offline"] = offline;
    j["ingest.top_classes"] = top_classes;
    j["ingest.ya_class"] = ya_class;
    j["model.top_k"] = top_k;
    j["model.min_score"] = min_score;
    j["model.min_global_occurrences"] = min_global_occurrences;
    j["model.occurrences"] = occurrences == taxonomy::OccurrenceMode::Records ? "records" : "paths";
    j["model.include_matched"] = include_matched;
    j["model.top_n"] = top_n;
    j["model.bold_threshold"] = bold_threshold;
    j["model.threads"] = threads;
    j["classifier.train_fraction"] = train_fraction;
    j["classifier.epochs"] = epochs;
    j["classifier.learning_rate"] = learning_rate;
    j["classifier.l2"] = l2;
    j["classifier.batch_size"] = batch_size;
    j["classifier.repetitions"] = repetitions;
    j["classifier.baseline_trials"] = baseline_trials;
    j["seed"] = seed;
    return j;
  }

  static double parse_real(const std::string& v) {
    double d = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), d);
    if (ec != std::errc() || p != v.data() + v.size() || !std::isfinite(d)) throw std::invalid_argument("not a number");
    return d;
  }
  static std::size_t parse_count(const std::string& v) {
    std::uint64_t n = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), n);
    if (ec != std::errc() || p != v.data() + v.size()) throw std::invalid_argument("not a non-negative integer");
    return static_cast<std::size_t>(n);
  }
  static bool parse_bool(const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw std::invalid_argument("not a boolean");
  }

 private:
  std::map<std::string, std::string> snapshot_;
};

// ---------------------------------------------------------------------------
// Run bookkeeping

/// Seconds since the epoch; SOURCE_DATE_EPOCH pins it for reproducible output.
inline std::string timestamp() {
  std::time_t t = std::time(nullptr);
  if (const char* sde = std::getenv("SOURCE_DATE_EPOCH")) t = static_cast<std::time_t>(std::strtoll(sde, nullptr, 10));
  char buf[32];
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline std::string file_digest(const fs::path& p) { return text::sha256_hex(io::read_file(p)); }

/// Digest over a directory's regular files: SHA-256 of "name<TAB>sha256\n" lines in name order.
inline std::string directory_digest(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file()) files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::string lines;
  for (const auto& f : files) lines += f.filename().string() + "\t" + file_digest(f) + "\n";
  return text::sha256_hex(lines);
}

class RunManifest {
 public:
  RunManifest(std::string command, const PipelineConfig& cfg) {
    j_["tool"] = "nounclass";
    j_["version"] = kToolVersion;
    j_["command"] = std::move(command);
    j_["wordnet_version"] = "3.0";
    j_["config"] = cfg.snapshot();
    j_["inputs"] = ordered_json::object();
    j_["stages"] = ordered_json::object();
    j_["started_at"] = timestamp();
  }

  void input(const std::string& name, const std::string& digest) { j_["inputs"][name] = digest; }
  ordered_json& stage(const std::string& name) { return j_["stages"][name]; }

  void write(const fs::path& out_dir) {
    j_["finished_at"] = timestamp();
    io::atomic_write(out_dir / "manifest.json", j_.dump(2) + "\n");
  }

 private:
  ordered_json j_;
};

/// Exclusive lock on an output directory for the lifetime of the object.
class OutputLock {
 public:
  explicit OutputLock(const fs::path& out_dir) : path_(out_dir / ".nounclass.lock") {
    fs::create_directories(out_dir);
    std::FILE* f = std::fopen(path_.c_str(), "wx");
    if (!f) throw PipelineError(kUsage, "output directory is locked by another run: " + path_.string());
    std::fclose(f);
  }
  ~OutputLock() {
    std::error_code ec;
    fs::remove(path_, ec);
  }
  OutputLock(const OutputLock&) = delete;
  OutputLock& operator=(const OutputLock&) = delete;

 private:
  fs::path path_;
};

// ---------------------------------------------------------------------------
// Stage helpers

inline void require_file(const fs::path& p, const std::string& what) {
  if (p.empty() || !fs::exists(p)) throw PipelineError(kMissingInput, what + " not found: " + p.string());
}

inline std::vector<lexicon::LexicalRecord> load_records(const PipelineConfig& cfg) {
  auto path = cfg.out_dir / "records.ndjson";
  require_file(path, "records file (run `ingest` first)");
  return lexicon::from_ndjson(io::read_file(path));
}

inline wordnet::TaxonomyGraph load_wordnet(const PipelineConfig& cfg) {
  require_file(cfg.wordnet_dir / "data.noun", "WordNet data.noun");
  require_file(cfg.wordnet_dir / "index.noun", "WordNet index.noun");
  return wordnet::parse_wordnet(cfg.wordnet_dir);
}

inline embedding::EmbeddingStore load_embeddings(const PipelineConfig& cfg) {
  require_file(cfg.embeddings, "embedding store");
  return embedding::load_store(cfg.embeddings);
}

/// The classes present, in presentation order.
inline std::vector<lexicon::ClassLabel> classes_of(const std::vector<lexicon::LexicalRecord>& records) {
  std::set<lexicon::ClassLabel> s;
  for (const auto& r : records) s.insert(r.class_label);
  return {s.begin(), s.end()};
}

// ---------------------------------------------------------------------------
// Commands

inline void stage_ingest(const PipelineConfig& cfg, RunManifest& manifest, std::ostream& log) {
  fs::create_directories(cfg.cache_dir);
  auto& st = manifest.stage("ingest");
  if (!cfg.offline && !cfg.base_url.empty()) {
    auto fetched = fetch::fetch_category_pages(cfg.base_url, cfg.category, cfg.cache_dir, cfg.rate_limit);
    for (const auto& e : fetched.errors) log << "fetch error: " << e.url << ": " << e.message << "\n";
    for (const auto& w : fetched.warnings) log << "fetch warning: " << w << "\n";
    st["network_requests"] = fetched.network_requests;
    st["fetch_errors"] = fetched.errors.size();
  }
  auto pages = fetch::PageCache(cfg.cache_dir).entries();
  if (pages.empty())
    throw PipelineError(kMissingInput, "no cached entry pages in " + cfg.cache_dir.string() +
                                           (cfg.offline ? " (offline mode)" : ""));
  manifest.input("cache", directory_digest(cfg.cache_dir));

  lexicon::CorrectionTable corrections;
  if (!cfg.corrections.empty()) {
    require_file(cfg.corrections, "corrections file");
    corrections = lexicon::CorrectionTable::parse(io::read_file(cfg.corrections));
    manifest.input("corrections", file_digest(cfg.corrections));
  }

  std::vector<lexicon::LexicalRecord> parsed;
  std::vector<lexicon::ParseWarning> warnings;
  for (const auto& page : pages) {
    auto r = lexicon::parse_entry_page(page, corrections);
    parsed.insert(parsed.end(), r.records.begin(), r.records.end());
    warnings.insert(warnings.end(), r.warnings.begin(), r.warnings.end());
  }
  auto dataset = lexicon::assemble_dataset(std::move(parsed), &warnings);
  auto filtered = lexicon::filter_top_classes(dataset, cfg.top_classes);
  if (filtered.records.empty()) throw PipelineError(kMissingInput, "no records parsed from " + cfg.cache_dir.string());

  lexicon::NominalClassMap nominal(cfg.ya_class);
  std::set<lexicon::ClassLabel> kept(filtered.stats.retained_classes.begin(), filtered.stats.retained_classes.end());
  std::string dist = "subject_concord,nominal_class,count,retained\n";
  for (const auto& [label, n] : filtered.stats.counts)
    dist += io::csv_field(label.name()) + "," + io::csv_field(nominal(label)) + "," + std::to_string(n) + "," +
            (kept.count(label) ? "1" : "0") + "\n";
  std::string warn_log;
  for (const auto& w : warnings) warn_log += w.str() + "\n";
  for (const auto& w : filtered.warnings) warn_log += "filter\t\t\t" + w + "\n";

  io::atomic_write(cfg.out_dir / "records.ndjson", lexicon::to_ndjson(filtered.records));
  io::atomic_write(cfg.out_dir / "class_distribution.csv", dist);
  io::atomic_write(cfg.out_dir / "parse_warnings.log", warn_log);

  st["pages"] = pages.size();
  st["records_parsed"] = dataset.size();
  st["records_retained"] = filtered.records.size();
  st["retained_fraction"] = filtered.stats.retained_fraction;
  st["warnings"] = warnings.size();
  log << "ingest: " << pages.size() << " pages, " << dataset.size() << " records, " << filtered.records.size()
      << " retained (" << io::fixed(100 * filtered.stats.retained_fraction, 1) << "%), " << warnings.size()
      << " warnings\n";
}

struct TextLine {
  text::EmbeddingKey key;
  std::string text;
};

/// Unique embedding texts (record definitions and synset glosses), sorted by key.
inline std::vector<TextLine> collect_texts(const std::vector<lexicon::LexicalRecord>& records,
                                           const wordnet::TaxonomyGraph& graph) {
  std::map<text::EmbeddingKey, std::string> texts;
  for (const auto& r : records) {
    auto t = text::keying_form(r.definition);
    texts.emplace(text::EmbeddingKey::of_text(t), t);
  }
  for (const auto& s : graph.synsets()) {
    auto t = text::keying_form(s.gloss);
    texts.emplace(text::EmbeddingKey::of_text(t), t);
  }
  std::vector<TextLine> out;
  for (auto& [k, t] : texts) out.push_back({k, std::move(t)});
  return out;
}

inline void stage_texts(const PipelineConfig& cfg, RunManifest& manifest, std::ostream& log) {
  auto records = load_records(cfg);
  auto graph = load_wordnet(cfg);
  manifest.input("records", file_digest(cfg.out_dir / "records.ndjson"));
  manifest.input("wordnet/data.noun", file_digest(cfg.wordnet_dir / "data.noun"));
  manifest.input("wordnet/index.noun", file_digest(cfg.wordnet_dir / "index.noun"));
  std::string out;
  auto lines = collect_texts(records, graph);
  for (const auto& l : lines) {
    ordered_json j;
    j["key"] = l.key.hex();
    j["text"] = l.text;
    out += j.dump() + "\n";
  }
  io::atomic_write(cfg.out_dir / "texts.ndjson", out);
  manifest.stage("texts")["texts"] = lines.size();
  log << "texts: " << lines.size() << " unique texts\n";
}

/// Soft check: the human class is expected to be the most cohesive.
inline std::vector<std::string> cohesion_soft_checks(const std::map<lexicon::ClassLabel, double>& cohesion) {
  std::vector<std::string> out;
  const lexicon::ClassLabel human(lexicon::Concord::AWa);
  auto it = cohesion.find(human);
  if (it == cohesion.end()) return out;
  for (const auto& [label, v] : cohesion)
    if (label != human && v >= it->second) {
      out.push_back("a-/wa- is not the most cohesive class: " + label.name() + " scores " + io::shortest(v) +
                    " >= " + io::shortest(it->second));
      break;
    }
  return out;
}

inline void stage_model(const PipelineConfig& cfg, RunManifest& manifest, std::ostream& log) {
  auto records = load_records(cfg);
  auto graph = load_wordnet(cfg);
  auto store = load_embeddings(cfg);
  manifest.input("records", file_digest(cfg.out_dir / "records.ndjson"));
  manifest.input("wordnet/data.noun", file_digest(cfg.wordnet_dir / "data.noun"));
  manifest.input("wordnet/index.noun", file_digest(cfg.wordnet_dir / "index.noun"));
  manifest.input("embeddings", file_digest(cfg.embeddings));

  std::vector<std::string> missing;
  std::size_t missing_total = 0;
  for (const auto& t : collect_texts(records, graph))
    if (!store.contains(t.key)) {
      if (missing.size() < 20) missing.push_back(t.key.hex() + "  " + t.text);
      ++missing_total;
    }
  if (missing_total) {
    std::string msg = "embedding store lacks " + std::to_string(missing_total) + " texts:";
    for (const auto& m : missing) msg += "\n  " + m;
    throw PipelineError(kCoverageGap, msg);
  }

  auto matches = taxonomy::match_records(records, store, graph, {cfg.top_k, cfg.min_score, cfg.threads});
  std::map<std::uint64_t, lexicon::ClassLabel> labels;
  for (const auto& r : records) labels.emplace(r.record_id, r.class_label);
  std::vector<taxonomy::RecordHypernymWeights> weights;
  std::size_t unmatched = 0;
  std::string matches_out;
  for (const auto& m : matches) {
    ordered_json j;
    j["record_id"] = m.record_id;
    auto arr = ordered_json::array();
    for (const auto& s : m.matches) arr.push_back({{"synset", graph.name(s.candidate_id)}, {"score", s.score}});
    j["matches"] = arr;
    matches_out += j.dump() + "\n";
    if (auto w = taxonomy::hypernym_weights(m, graph, cfg.include_matched)) weights.push_back(std::move(*w));
    else ++unmatched;
  }

  taxonomy::JointDistribution joint;
  try {
    joint = taxonomy::build_joint(weights, labels, {cfg.min_global_occurrences, cfg.occurrences});
  } catch (const std::runtime_error& e) {
    throw PipelineError(kInvariant, e.what());
  }
  auto cohesion = taxonomy::class_cohesion(joint);
  const double total = taxonomy::total_dependency(joint);
  auto tables = taxonomy::descriptor_table(joint, graph, {cfg.top_n, cfg.bold_threshold});
  auto soft = cohesion_soft_checks(cohesion);

  ordered_json summary;
  summary["records"] = records.size();
  summary["matched_records"] = weights.size();
  summary["unmatched_records"] = unmatched;
  summary["classes"] = joint.classes().size();
  summary["hypernyms_retained"] = joint.hypernyms().size();
  summary["hypernyms_dropped"] = joint.hypernyms_dropped;
  auto coh = ordered_json::object();
  double coh_sum = 0;
  for (const auto& [label, v] : cohesion) {
    coh[label.name()] = v;
    coh_sum += v;
  }
  summary["cohesion"] = coh;
  summary["cohesion_macro"] = cohesion.empty() ? 0.0 : coh_sum / static_cast<double>(cohesion.size());
  summary["total_dependency_shannons"] = total;
  summary["parameters"] = {{"top_k", cfg.top_k},
                           {"min_score", cfg.min_score},
                           {"min_global_occurrences", cfg.min_global_occurrences},
                           {"occurrences", cfg.occurrences == taxonomy::OccurrenceMode::Records ? "records" : "paths"},
                           {"include_matched", cfg.include_matched},
                           {"top_n", cfg.top_n},
                           {"bold_threshold", cfg.bold_threshold}};
  summary["soft_checks"] = soft;

  io::atomic_write(cfg.out_dir / "matches.ndjson", matches_out);
  io::atomic_write(cfg.out_dir / "cohesion.csv", taxonomy::cohesion_csv(cohesion));
  io::atomic_write(cfg.out_dir / "descriptors.csv", taxonomy::descriptors_csv(tables));
  io::atomic_write(cfg.out_dir / "descriptors.md", taxonomy::descriptors_markdown(tables, cfg.top_n));
  io::atomic_write(cfg.out_dir / "run_summary.json", summary.dump(2) + "\n");

  auto& st = manifest.stage("model");
  st["matched_records"] = weights.size();
  st["unmatched_records"] = unmatched;
  st["hypernyms_retained"] = joint.hypernyms().size();
  for (const auto& s : soft) log << "warning: " << s << "\n";
  log << "model: " << weights.size() << " matched, " << unmatched << " unmatched, total dependency "
      << io::fixed(total, 4) << " Sh\n";
}

inline void stage_eval(const PipelineConfig& cfg, RunManifest& manifest, std::ostream& log) {
  auto records = load_records(cfg);
  auto store = load_embeddings(cfg);
  manifest.input("records", file_digest(cfg.out_dir / "records.ndjson"));
  manifest.input("embeddings", file_digest(cfg.embeddings));

  auto classes = classes_of(records);
  std::vector<std::string> names;
  for (const auto& c : classes) names.push_back(c.name());
  std::map<std::uint64_t, const lexicon::LexicalRecord*> by_id;
  std::vector<std::uint64_t> ids;
  std::size_t missing = 0;
  std::string first_missing;
  for (const auto& r : records) {
    by_id[r.record_id] = &r;
    ids.push_back(r.record_id);
    if (!store.contains(taxonomy::definition_key(r)) && missing++ == 0)
      first_missing = taxonomy::definition_key(r).hex() + " (record " + std::to_string(r.record_id) + ")";
  }
  if (missing)
    throw PipelineError(kCoverageGap, "embedding store lacks " + std::to_string(missing) + " record definitions, e.g. " + first_missing);

  classifier::Split sp;
  try {
    sp = classifier::split(ids, {cfg.train_fraction, cfg.seed});
  } catch (const std::invalid_argument& e) {
    throw PipelineError(kMissingInput, e.what());
  }
  auto examples = [&](const std::vector<std::uint64_t>& subset) {
    classifier::Examples ex;
    ex.dim = store.dim();
    for (auto id : subset) {
      const auto& r = *by_id.at(id);
      auto label = static_cast<std::size_t>(std::find(classes.begin(), classes.end(), r.class_label) - classes.begin());
      ex.add(store.at(taxonomy::definition_key(r)), label);
    }
    return ex;
  };
  auto train_set = examples(sp.train), eval_set = examples(sp.eval);
  classifier::TrainParams tp{cfg.learning_rate, cfg.epochs, cfg.l2, cfg.seed, cfg.batch_size};
  classifier::EvalReport report;
  try {
    report = cfg.repetitions >= 2
                 ? classifier::repeat_and_aggregate(cfg.repetitions, train_set, eval_set, names, tp)
                 : classifier::evaluate(classifier::train(train_set, names.size(), tp).model, eval_set, names);
  } catch (const classifier::TrainingDiverged& e) {
    throw PipelineError(kInvariant, e.what());
  }

  std::vector<std::pair<std::string, std::size_t>> counts;
  auto dist = lexicon::class_distribution(records);
  for (const auto& c : classes) counts.emplace_back(c.name(), dist.at(c));
  auto baseline = classifier::weighted_random_baseline(counts, cfg.baseline_trials, cfg.seed);

  ordered_json j;
  j["split"] = {{"train", sp.train.size()}, {"eval", sp.eval.size()}, {"train_fraction", cfg.train_fraction},
                {"seed", cfg.seed}, {"stratified", false}};
  j["hyperparameters"] = {{"learning_rate", tp.learning_rate}, {"epochs", tp.epochs}, {"l2", tp.l2},
                          {"batch_size", tp.batch_size}, {"repetitions", cfg.repetitions}};
  j["model"] = classifier::to_json(report);
  j["baseline"] = classifier::to_json(baseline);
  j["baseline_analytic_macro_f1"] = classifier::analytic_weighted_random_macro_f1(counts);
  io::atomic_write(cfg.out_dir / "eval_report.json", j.dump(2) + "\n");
  io::atomic_write(cfg.out_dir / "confusion.csv", classifier::confusion_csv(report));
  io::atomic_write(cfg.out_dir / "eval_report.md", "# Class prediction\n\n" + classifier::f1_markdown(report, baseline));

  auto& st = manifest.stage("eval");
  st["train"] = sp.train.size();
  st["eval"] = sp.eval.size();
  st["macro_f1"] = report.macro_f1;
  st["baseline_macro_f1"] = baseline.macro_f1;
  log << "eval: macro F1 " << io::fixed(100 * report.macro_f1, 1) << ", micro F1 " << io::fixed(100 * report.micro_f1, 1)
      << ", weighted random " << io::fixed(100 * baseline.macro_f1, 1) << "\n";
}

/// Runs one subcommand (`ingest`, `texts`, `model`, `eval` or `all`).
inline void run(const std::string& command, const PipelineConfig& cfg, std::ostream& log = std::cerr) {
  static const std::vector<std::string> known = {"ingest", "texts", "model", "eval", "all"};
  if (std::find(known.begin(), known.end(), command) == known.end())
    throw PipelineError(kUsage, "unknown command '" + command + "'");
  cfg.validate();
  const bool all = command == "all";
  // Inputs each stage needs from outside the output directory.
  if (command == "texts" || command == "model" || all) {
    require_file(cfg.wordnet_dir / "data.noun", "WordNet data.noun");
    require_file(cfg.wordnet_dir / "index.noun", "WordNet index.noun");
  }
  if (command == "model" || command == "eval" || all) require_file(cfg.embeddings, "embedding store");
  if ((command == "ingest" || all) && !cfg.corrections.empty()) require_file(cfg.corrections, "corrections file");
  if ((command == "ingest" || all) && cfg.offline && !fs::exists(cfg.cache_dir))
    throw PipelineError(kMissingInput, "cache directory not found: " + cfg.cache_dir.string());
  if (!all && command != "ingest") require_file(cfg.out_dir / "records.ndjson", "records file (run `ingest` first)");

  OutputLock lock(cfg.out_dir);
  RunManifest manifest(command, cfg);
  if (command == "ingest" || all) stage_ingest(cfg, manifest, log);
  if (command == "texts" || all) stage_texts(cfg, manifest, log);
  if (command == "model" || all) stage_model(cfg, manifest, log);
  if (command == "eval" || all) stage_eval(cfg, manifest, log);
  manifest.write(cfg.out_dir);
}

}  // namespace nounclass::pipeline

#endif  // NOUNCLASS_PIPELINE_HPP_
