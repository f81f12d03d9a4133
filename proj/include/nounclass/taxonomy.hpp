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

// Class x hypernym association model.
//
// Each record is grounded in up to k synsets whose glosses are closest to its
// definition. All hypernym paths of those synsets are pooled, and every synset
// on them is weighted by the fraction of pooled paths passing through it.
// Summing weights per class gives a class x hypernym mass table; after
// dropping rare hypernyms it is normalized into a joint distribution on which
// PMI and frequency-weighted PMI (wPMI = p(c,h) * PMI(c,h)) are computed.
// Positive wPMI cells are a class's descriptors; their sum is its cohesion.

#ifndef NOUNCLASS_TAXONOMY_HPP_
#define NOUNCLASS_TAXONOMY_HPP_

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "nounclass/embedding_store.hpp"
#include "nounclass/io.hpp"
#include "nounclass/lexicon.hpp"
#include "nounclass/text.hpp"
#include "nounclass/wordnet.hpp"

namespace nounclass::taxonomy {

using embedding::EmbeddingStore;
using embedding::SimilarityMatch;
using lexicon::ClassLabel;
using lexicon::LexicalRecord;
using text::EmbeddingKey;
using wordnet::SynsetId;
using wordnet::TaxonomyGraph;

// ---------------------------------------------------------------------------
// Matching

struct MatchParams {
  std::size_t top_k = 10;
  double min_score = 0.5;
  unsigned threads = 1;
};

struct RecordMatches {
  std::uint64_t record_id = 0;
  std::vector<SimilarityMatch<SynsetId>> matches;  // descending score
};

inline EmbeddingKey definition_key(const LexicalRecord& r) { return EmbeddingKey::of_text(text::keying_form(r.definition)); }
inline EmbeddingKey gloss_key(const wordnet::Synset& s) { return EmbeddingKey::of_text(text::keying_form(s.gloss)); }

/// Top-k synsets per record by gloss similarity, ordered by record id.
inline std::vector<RecordMatches> match_records(const std::vector<LexicalRecord>& records, const EmbeddingStore& store,
                                                const TaxonomyGraph& graph, const MatchParams& params = {}) {
  std::vector<std::pair<std::uint64_t, EmbeddingKey>> queries;
  for (const auto& r : records) {
    auto key = definition_key(r);
    if (!store.contains(key))
      throw embedding::MissingKeyError(key, "record " + std::to_string(r.record_id) + " ('" + r.entry + "': " + r.definition + ")");
    queries.emplace_back(r.record_id, key);
  }
  std::vector<std::pair<SynsetId, EmbeddingKey>> candidates;
  for (const auto& s : graph.synsets()) {
    auto key = gloss_key(s);
    if (!store.contains(key)) throw embedding::MissingKeyError(key, "synset " + s.display_name);
    candidates.emplace_back(s.id, key);
  }
  auto found = embedding::top_k_matches(queries, candidates, store, params.top_k, params.min_score, params.threads);
  std::vector<RecordMatches> out;
  for (auto& [id, m] : found) out.push_back({id, std::move(m)});
  return out;
}

// ---------------------------------------------------------------------------
// Per-record hypernym weights

struct RecordHypernymWeights {
  std::uint64_t record_id = 0;
  std::map<SynsetId, std::size_t> path_counts;  // pooled paths through each synset
  std::size_t total_paths = 0;

  double weight(const SynsetId& h) const {
    auto it = path_counts.find(h);
    return it == path_counts.end() ? 0.0 : static_cast<double>(it->second) / static_cast<double>(total_paths);
  }

  std::map<SynsetId, double> weights() const {
    std::map<SynsetId, double> w;
    for (const auto& [h, n] : path_counts) w[h] = static_cast<double>(n) / static_cast<double>(total_paths);
    return w;
  }
};

/// Empty matches give no weights; the record is left out downstream.
/// With `include_matched` false the matched synsets themselves (the first
/// node of each path) are not counted.
inline std::optional<RecordHypernymWeights> hypernym_weights(const RecordMatches& matches, const TaxonomyGraph& graph,
                                                             bool include_matched = true) {
  if (matches.matches.empty()) return std::nullopt;
  RecordHypernymWeights w;
  w.record_id = matches.record_id;
  for (const auto& m : matches.matches) {
    for (const auto& path : graph.hypernym_paths(m.candidate_id)) {
      ++w.total_paths;
      for (std::size_t i = include_matched ? 0 : 1; i < path.size(); ++i) ++w.path_counts[path[i]];
    }
  }
  return w;
}

// ---------------------------------------------------------------------------
// Joint distribution

class JointDistribution {
 public:
  JointDistribution() = default;

  /// Normalizes a non-negative class x hypernym mass table (row-major).
  static JointDistribution from_masses(std::vector<ClassLabel> classes, std::vector<SynsetId> hypernyms,
                                       const std::vector<double>& mass) {
    if (mass.size() != classes.size() * hypernyms.size()) throw std::invalid_argument("mass table has wrong size");
    double total = 0;
    for (double m : mass) {
      if (!(m >= 0) || !std::isfinite(m)) throw std::invalid_argument("mass must be finite and non-negative");
      total += m;
    }
    if (!(total > 0)) throw std::invalid_argument("joint distribution has no mass");
    JointDistribution d;
    d.classes_ = std::move(classes);
    d.hypernyms_ = std::move(hypernyms);
    d.p_joint_.resize(mass.size());
    d.p_class_.assign(d.classes_.size(), 0.0);
    d.p_hyp_.assign(d.hypernyms_.size(), 0.0);
    for (std::size_t c = 0; c < d.classes_.size(); ++c)
      for (std::size_t h = 0; h < d.hypernyms_.size(); ++h) {
        double p = mass[c * d.hypernyms_.size() + h] / total;
        d.p_joint_[c * d.hypernyms_.size() + h] = p;
        d.p_class_[c] += p;
        d.p_hyp_[h] += p;
      }
    return d;
  }

  const std::vector<ClassLabel>& classes() const { return classes_; }
  const std::vector<SynsetId>& hypernyms() const { return hypernyms_; }
  double joint(std::size_t c, std::size_t h) const { return p_joint_.at(c * hypernyms_.size() + h); }
  double p_class(std::size_t c) const { return p_class_.at(c); }
  double p_hyp(std::size_t h) const { return p_hyp_.at(h); }

  std::size_t class_index(const ClassLabel& c) const {
    auto it = std::find(classes_.begin(), classes_.end(), c);
    if (it == classes_.end()) throw std::out_of_range("class not in distribution: " + c.name());
    return static_cast<std::size_t>(it - classes_.begin());
  }
  std::size_t hypernym_index(const SynsetId& h) const {
    auto it = std::find(hypernyms_.begin(), hypernyms_.end(), h);
    if (it == hypernyms_.end()) throw std::out_of_range("hypernym not in distribution: " + wordnet::to_string(h));
    return static_cast<std::size_t>(it - hypernyms_.begin());
  }

  /// Bookkeeping from build_joint.
  std::size_t records_used = 0;
  std::size_t hypernyms_dropped = 0;

 private:
  std::vector<ClassLabel> classes_;
  std::vector<SynsetId> hypernyms_;
  std::vector<double> p_joint_;
  std::vector<double> p_class_;
  std::vector<double> p_hyp_;
};

/// What counts as one "global occurrence" of a hypernym for the rarity filter.
enum class OccurrenceMode {
  Records,  // distinct records giving it positive weight
  Paths,    // pooled paths through it, summed over records
};

struct JointParams {
  std::size_t min_global_occurrences = 10;
  OccurrenceMode occurrences = OccurrenceMode::Records;
};

/// Sums record weights per (class, hypernym), drops hypernyms with fewer than
/// `min_global_occurrences` occurrences and normalizes what remains. Records
/// are reduced in record-id order, so the result is bitwise stable.
inline JointDistribution build_joint(std::vector<RecordHypernymWeights> all_weights,
                                     const std::map<std::uint64_t, ClassLabel>& labels, const JointParams& params = {}) {
  std::sort(all_weights.begin(), all_weights.end(),
            [](const auto& a, const auto& b) { return a.record_id < b.record_id; });
  std::map<SynsetId, std::size_t> occurrences;
  std::map<ClassLabel, std::map<SynsetId, double>> mass;
  for (const auto& w : all_weights) {
    auto it = labels.find(w.record_id);
    if (it == labels.end()) throw std::invalid_argument("record " + std::to_string(w.record_id) + " has no class label");
    auto& row = mass[it->second];
    for (const auto& [h, n] : w.path_counts) {
      occurrences[h] += params.occurrences == OccurrenceMode::Records ? 1 : n;
      row[h] += static_cast<double>(n) / static_cast<double>(w.total_paths);
    }
  }
  std::vector<SynsetId> kept;
  std::size_t dropped = 0;
  for (const auto& [h, n] : occurrences) {
    if (n >= params.min_global_occurrences) kept.push_back(h);
    else ++dropped;
  }
  std::vector<ClassLabel> classes;
  for (const auto& [c, row] : mass)
    for (const auto& h : kept)
      if (auto it = row.find(h); it != row.end() && it->second > 0) {
        classes.push_back(c);
        break;
      }
  if (classes.empty() || kept.empty()) throw std::runtime_error("no hypernym mass left after the occurrence filter");
  std::vector<double> table(classes.size() * kept.size(), 0.0);
  for (std::size_t c = 0; c < classes.size(); ++c) {
    const auto& row = mass.at(classes[c]);
    for (std::size_t h = 0; h < kept.size(); ++h)
      if (auto it = row.find(kept[h]); it != row.end()) table[c * kept.size() + h] = it->second;
  }
  // Hypernyms whose retained mass is zero for every class cannot occur: each
  // kept hypernym has at least one contributing record.
  auto d = JointDistribution::from_masses(std::move(classes), std::move(kept), table);
  d.records_used = all_weights.size();
  d.hypernyms_dropped = dropped;
  return d;
}

// ---------------------------------------------------------------------------
// Association measures (shannons)

/// log2(p(c,h) / (p(c) p(h))); -infinity when p(c,h) = 0.
inline double pmi(const JointDistribution& d, std::size_t c, std::size_t h) {
  const double pc = d.p_class(c), ph = d.p_hyp(h);
  if (!(pc > 0) || !(ph > 0)) throw std::domain_error("pmi: zero marginal probability");
  const double pj = d.joint(c, h);
  if (pj == 0.0) return -std::numeric_limits<double>::infinity();
  return std::log2(pj / (pc * ph));
}

/// p(c,h) * PMI(c,h), with 0 at zero joint mass.
inline double wpmi(const JointDistribution& d, std::size_t c, std::size_t h) {
  const double v = pmi(d, c, h);
  const double pj = d.joint(c, h);
  return pj == 0.0 ? 0.0 : pj * v;
}

inline double pmi(const JointDistribution& d, const ClassLabel& c, const SynsetId& h) {
  return pmi(d, d.class_index(c), d.hypernym_index(h));
}
inline double wpmi(const JointDistribution& d, const ClassLabel& c, const SynsetId& h) {
  return wpmi(d, d.class_index(c), d.hypernym_index(h));
}

/// Per class, the sum of its positive wPMI cells.
inline std::map<ClassLabel, double> class_cohesion(const JointDistribution& d) {
  std::map<ClassLabel, double> out;
  for (std::size_t c = 0; c < d.classes().size(); ++c) {
    double s = 0;
    for (std::size_t h = 0; h < d.hypernyms().size(); ++h) s += std::max(wpmi(d, c, h), 0.0);
    out[d.classes()[c]] = s;
  }
  return out;
}

inline double total_dependency(const JointDistribution& d) {
  double s = 0;
  for (std::size_t c = 0; c < d.classes().size(); ++c)
    for (std::size_t h = 0; h < d.hypernyms().size(); ++h) s += std::max(wpmi(d, c, h), 0.0);
  return s;
}

// ---------------------------------------------------------------------------
// Descriptor tables

struct DescriptorScore {
  ClassLabel class_label;
  SynsetId hypernym;
  std::string name;
  double wpmi = 0;
  double scaled = 0;  // 100 * wpmi / p(c)
  bool bold = false;
  bool shadowed = false;

  /// Scaled score as printed, one decimal.
  std::string rendered() const { return io::fixed(scaled, 1); }
};

/// wPMI at or below this counts as zero when selecting descriptors, so cells
/// that are independent up to rounding do not surface.
inline constexpr double kZeroWpmi = 1e-12;

struct DescriptorParams {
  std::size_t top_n = 20;
  double bold_threshold = 1.0;
};

using DescriptorTables = std::map<ClassLabel, std::vector<DescriptorScore>>;

/// Positive-wPMI hypernyms per class, best first (ties by name), cut to top_n.
/// A descriptor is shadowed when it is a hyponym of a same-class descriptor
/// with a strictly higher scaled score.
inline DescriptorTables descriptor_table(const JointDistribution& d, const TaxonomyGraph& graph,
                                         const DescriptorParams& params = {}) {
  DescriptorTables out;
  for (std::size_t c = 0; c < d.classes().size(); ++c) {
    std::vector<DescriptorScore> rows;
    for (std::size_t h = 0; h < d.hypernyms().size(); ++h) {
      const double w = wpmi(d, c, h);
      if (!(w > kZeroWpmi)) continue;
      DescriptorScore s;
      s.class_label = d.classes()[c];
      s.hypernym = d.hypernyms()[h];
      s.name = graph.name(s.hypernym);
      s.wpmi = w;
      s.scaled = 100.0 * w / d.p_class(c);
      s.bold = s.scaled > params.bold_threshold;
      rows.push_back(std::move(s));
    }
    std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
      if (a.scaled != b.scaled) return a.scaled > b.scaled;
      return a.name < b.name;
    });
    if (rows.size() > params.top_n) rows.resize(params.top_n);
    // Anything scoring strictly higher ranks earlier, so truncation cannot
    // remove a shadowing descriptor.
    for (std::size_t i = 0; i < rows.size(); ++i)
      for (std::size_t j = 0; j < i && !rows[i].shadowed; ++j)
        if (rows[j].scaled > rows[i].scaled && graph.is_hyponym_of(rows[i].hypernym, rows[j].hypernym))
          rows[i].shadowed = true;
    out[d.classes()[c]] = std::move(rows);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Reports

inline std::string descriptors_csv(const DescriptorTables& tables) {
  std::string out = "subject_concord,rank,descriptor,synset,wpmi,scaled,score,bold,shadowed\n";
  for (const auto& [label, rows] : tables)
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto& r = rows[i];
      out += io::csv_field(label.name()) + "," + std::to_string(i + 1) + "," + io::csv_field(r.name) + "," +
             wordnet::to_string(r.hypernym) + "," + io::shortest(r.wpmi) + "," + io::shortest(r.scaled) + "," +
             r.rendered() + "," + (r.bold ? "1" : "0") + "," + (r.shadowed ? "1" : "0") + "\n";
    }
  return out;
}

inline std::string descriptors_markdown(const DescriptorTables& tables, std::size_t top_n) {
  std::string out = "# Taxonomic descriptors\n\n";
  out += "Scores are wPMI multiplied by 100/p(c). Bold scores exceed the bold threshold; shadowed descriptors are "
         "hyponyms of a higher-scoring descriptor of the same class (struck through below).\n\n";
  out += "| Subject Concord | Top " + std::to_string(top_n) + " Descriptors |\n|---|---|\n";
  for (const auto& [label, rows] : tables) {
    out += "| *" + label.name() + "* | ";
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto& r = rows[i];
      if (i) out += ", ";
      std::string score = r.bold ? "**" + r.rendered() + "**" : r.rendered();
      out += (r.shadowed ? "~~" + r.name + "~~" : r.name) + " (" + score + ")";
    }
    out += " |\n";
  }
  out += "\n| Subject Concord | Rank | Descriptor | Score | Shadowed |\n|---|---:|---|---:|:---:|\n";
  for (const auto& [label, rows] : tables)
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto& r = rows[i];
      out += "| " + label.name() + " | " + std::to_string(i + 1) + " | " + r.name + " | " +
             (r.bold ? "**" + r.rendered() + "**" : r.rendered()) + " | " + (r.shadowed ? "yes" : "") + " |\n";
    }
  return out;
}

inline std::string cohesion_csv(const std::map<ClassLabel, double>& cohesion) {
  std::string out = "subject_concord,cohesion\n";
  for (const auto& [label, v] : cohesion) out += io::csv_field(label.name()) + "," + io::shortest(v) + "\n";
  return out;
}

}  // namespace nounclass::taxonomy

#endif  // NOUNCLASS_TAXONOMY_HPP_
