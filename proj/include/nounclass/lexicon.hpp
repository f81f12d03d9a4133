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

// Dictionary entry pages -> lexical records.
//
// Entry pages follow the dictionary's typographic notation:
//
//   <h2 class="headword">yahe</h2>
//   <p class="sense">n (a-/wa-) 1 friend, comrade. 2 commoner: yeye ni yahe tu, he is just a commoner.</p>
//
// One sense block per concord group. A group may list several concords
// separated by commas; meanings are numbered "1 ... 2 ..." when there is more
// than one. Within a meaning, text after ':' is a usage example, "(prov)"
// starts an apothegm, [...] is an editorial comment and short lowercase
// parentheticals such as "(fig)" or "(zool.)" are field labels. All of these
// are stripped.

#ifndef NOUNCLASS_LEXICON_HPP_
#define NOUNCLASS_LEXICON_HPP_

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include <nlohmann/json.hpp>

#include "nounclass/io.hpp"
#include "nounclass/text.hpp"

namespace nounclass::lexicon {

// Declaration order is the presentation order used in every report.
enum class Concord { AWa, IZi, U, KiVi, UI, LiYa, Ya, UZi, I, Other };

inline constexpr std::array<std::string_view, 9> kNamedConcords = {
    "a-/wa-", "i-/zi-", "u-", "ki-/vi-", "u-/i-", "li-/ya-", "ya-", "u-/zi-", "i-"};

class ClassLabel {
 public:
  ClassLabel() = default;
  explicit ClassLabel(Concord c) : concord_(c) {
    if (c == Concord::Other) throw std::invalid_argument("Concord::Other needs its source text");
  }
  static ClassLabel other(std::string text) {
    ClassLabel l;
    l.concord_ = Concord::Other;
    l.other_ = std::move(text);
    return l;
  }

  /// Maps a concord marker as printed in the dictionary; unknown markers become other(text).
  static ClassLabel parse(std::string_view marker) {
    std::string m;
    for (char ch : marker)
      if (ch != ' ' && ch != '\t') m.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
    for (std::size_t i = 0; i < kNamedConcords.size(); ++i)
      if (m == kNamedConcords[i]) return ClassLabel(static_cast<Concord>(i));
    return other(m);
  }

  Concord concord() const { return concord_; }
  bool is_other() const { return concord_ == Concord::Other; }

  std::string name() const {
    if (is_other()) return other_;
    return std::string(kNamedConcords[static_cast<std::size_t>(concord_)]);
  }

  friend bool operator==(const ClassLabel&, const ClassLabel&) = default;
  friend bool operator<(const ClassLabel& a, const ClassLabel& b) {
    return std::tie(a.concord_, a.other_) < std::tie(b.concord_, b.other_);
  }

 private:
  Concord concord_ = Concord::AWa;
  std::string other_;
};

/// Concord -> nominal class tag. The ya- entry is not attested as a grouping
/// of its own and defaults to "6?"; callers may override it.
class NominalClassMap {
 public:
  NominalClassMap() = default;
  explicit NominalClassMap(std::string ya_class) : ya_(std::move(ya_class)) {}

  std::string operator()(const ClassLabel& label) const {
    switch (label.concord()) {
      case Concord::AWa: return "1/2";
      case Concord::UI: return "3/4";
      case Concord::LiYa: return "5/6";
      case Concord::KiVi: return "7/8";
      case Concord::IZi: return "9/10";
      case Concord::U: return "11|14";
      case Concord::I: return "4|9";
      case Concord::UZi: return "(11|14)/10";
      case Concord::Ya: return ya_;
      case Concord::Other: return "?";
    }
    return "?";
  }

 private:
  std::string ya_ = "6?";
};

struct LexicalRecord {
  std::uint64_t record_id = 0;
  std::string entry;
  std::string definition;
  ClassLabel class_label;

  friend bool operator==(const LexicalRecord&, const LexicalRecord&) = default;
};

struct RawEntry {
  std::string source_url;
  std::string body;
  std::chrono::system_clock::time_point fetched_at{};
};

enum class WarningKind { Unparseable, UnknownConcord, EmptyDefinition, CrossReference, NotANoun, Duplicate };

inline std::string_view to_string(WarningKind k) {
  switch (k) {
    case WarningKind::Unparseable: return "unparseable";
    case WarningKind::UnknownConcord: return "unknown-concord";
    case WarningKind::EmptyDefinition: return "empty-definition";
    case WarningKind::CrossReference: return "cross-reference";
    case WarningKind::NotANoun: return "not-a-noun";
    case WarningKind::Duplicate: return "duplicate";
  }
  return "?";
}

struct ParseWarning {
  WarningKind kind;
  std::string entry;
  std::string source_url;
  std::string message;

  /// True when the warning stands in for a meaning that produced no record.
  bool drops_meaning() const {
    return kind == WarningKind::EmptyDefinition || kind == WarningKind::CrossReference ||
           kind == WarningKind::NotANoun;
  }

  std::string str() const {
    return std::string(to_string(kind)) + "\t" + entry + "\t" + source_url + "\t" + message;
  }
};

// ---------------------------------------------------------------------------
// Corrections

enum class CorrectionScope { Entry, Definition, Concord };

struct CorrectionRule {
  std::string pattern;
  std::string replacement;
  CorrectionScope scope;
};

/// Literal substring rewrites, applied in listed order.
class CorrectionTable {
 public:
  CorrectionTable() = default;
  explicit CorrectionTable(std::vector<CorrectionRule> rules) : rules_(std::move(rules)) {}

  /// Tab-separated `scope  pattern  replacement`; '#' starts a comment line.
  /// "\t" and "\n" escapes are honoured in pattern and replacement.
  static CorrectionTable parse(std::string_view contents) {
    std::vector<CorrectionRule> rules;
    auto lines = io::split_lines(contents);
    for (std::size_t n = 0; n < lines.size(); ++n) {
      const std::string& line = lines[n];
      if (line.empty() || line[0] == '#') continue;
      std::vector<std::string> cols;
      std::size_t start = 0;
      for (;;) {
        auto tab = line.find('\t', start);
        cols.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
        if (tab == std::string::npos) break;
        start = tab + 1;
      }
      if (cols.size() != 3)
        throw std::runtime_error("corrections line " + std::to_string(n + 1) + ": expected 3 tab-separated columns");
      CorrectionScope scope;
      if (cols[0] == "entry") scope = CorrectionScope::Entry;
      else if (cols[0] == "definition") scope = CorrectionScope::Definition;
      else if (cols[0] == "concord") scope = CorrectionScope::Concord;
      else throw std::runtime_error("corrections line " + std::to_string(n + 1) + ": unknown scope '" + cols[0] + "'");
      if (cols[1].empty()) throw std::runtime_error("corrections line " + std::to_string(n + 1) + ": empty pattern");
      rules.push_back({unescape(cols[1]), unescape(cols[2]), scope});
    }
    return CorrectionTable(std::move(rules));
  }

  std::string apply(std::string s, CorrectionScope scope) const {
    for (const auto& r : rules_) {
      if (r.scope != scope) continue;
      std::size_t pos = 0;
      while ((pos = s.find(r.pattern, pos)) != std::string::npos) {
        s.replace(pos, r.pattern.size(), r.replacement);
        pos += r.replacement.size();
      }
    }
    return s;
  }

  const std::vector<CorrectionRule>& rules() const { return rules_; }

 private:
  static std::string unescape(std::string_view s) {
    std::string out;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s[i] == '\\' && i + 1 < s.size()) {
        char n = s[i + 1];
        if (n == 't') { out += '\t'; ++i; continue; }
        if (n == 'n') { out += '\n'; ++i; continue; }
        if (n == '\\') { out += '\\'; ++i; continue; }
      }
      out += s[i];
    }
    return out;
  }

  std::vector<CorrectionRule> rules_;
};

// ---------------------------------------------------------------------------
// Page parsing

namespace detail {

inline std::string decode_entities(std::string_view s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '&') { out += s[i]; continue; }
    auto semi = s.find(';', i);
    if (semi == std::string_view::npos || semi - i > 10) { out += s[i]; continue; }
    std::string_view name = s.substr(i + 1, semi - i - 1);
    std::uint32_t cp = 0;
    if (name == "amp") cp = '&';
    else if (name == "lt") cp = '<';
    else if (name == "gt") cp = '>';
    else if (name == "quot") cp = '"';
    else if (name == "apos") cp = '\'';
    else if (name == "nbsp") cp = 0xA0;
    else if (name.size() > 1 && name[0] == '#') {
      int base = 10;
      std::string_view digits = name.substr(1);
      if (!digits.empty() && (digits[0] == 'x' || digits[0] == 'X')) { base = 16; digits.remove_prefix(1); }
      auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), cp, base);
      if (ec != std::errc() || p != digits.data() + digits.size()) cp = 0;
    }
    if (cp == 0) { out += s[i]; continue; }
    // UTF-8 encode
    if (cp < 0x80) out += static_cast<char>(cp);
    else if (cp < 0x800) { out += static_cast<char>(0xC0 | (cp >> 6)); out += static_cast<char>(0x80 | (cp & 0x3F)); }
    else if (cp < 0x10000) {
      out += static_cast<char>(0xE0 | (cp >> 12));
      out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
      out += static_cast<char>(0x80 | (cp & 0x3F));
    } else {
      out += static_cast<char>(0xF0 | (cp >> 18));
      out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
      out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
      out += static_cast<char>(0x80 | (cp & 0x3F));
    }
    i = semi;
  }
  return out;
}

inline std::string strip_tags(std::string_view s) {
  std::string out;
  bool in_tag = false;
  for (char c : s) {
    if (c == '<') in_tag = true;
    else if (c == '>' && in_tag) in_tag = false;
    else if (!in_tag) out += c;
  }
  return out;
}

/// Inner HTML of every element opened with `open_prefix` (e.g. `<p class="sense"`).
inline std::vector<std::string> elements(std::string_view html, std::string_view open_prefix, std::string_view close) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while ((pos = html.find(open_prefix, pos)) != std::string_view::npos) {
    auto gt = html.find('>', pos);
    if (gt == std::string_view::npos) break;
    auto end = html.find(close, gt + 1);
    if (end == std::string_view::npos) break;
    out.emplace_back(html.substr(gt + 1, end - gt - 1));
    pos = end + close.size();
  }
  return out;
}

inline bool is_label_parenthetical(std::string_view inner) {
  if (inner.empty() || inner.size() > 8) return false;
  for (char c : inner)
    if (!(std::islower(static_cast<unsigned char>(c)) || c == '.')) return false;
  return true;
}

/// Splits "1 foo. 2 bar" into numbered meanings. Markers count only at the
/// start or after '.'/';' and must run 1, 2, 3, ... in sequence.
inline std::vector<std::string> split_meanings(std::string_view text) {
  std::string t = text::trim(text);
  if (!(t.size() >= 2 && t[0] == '1' && t[1] == ' ')) return {t};
  std::vector<std::size_t> starts{0};
  int next = 2;
  for (std::size_t i = 1; i < t.size(); ++i) {
    std::string marker = std::to_string(next) + " ";
    if (t.compare(i, marker.size(), marker) != 0) continue;
    std::size_t j = i;
    while (j > 0 && t[j - 1] == ' ') --j;
    if (j == i || j == 0 || (t[j - 1] != '.' && t[j - 1] != ';')) continue;
    starts.push_back(i);
    ++next;
  }
  std::vector<std::string> out;
  for (std::size_t k = 0; k < starts.size(); ++k) {
    std::size_t b = starts[k] + std::to_string(k + 1).size() + 1;
    std::size_t e = k + 1 < starts.size() ? starts[k + 1] : t.size();
    out.push_back(text::trim(std::string_view(t).substr(b, e - b)));
  }
  return out;
}

inline std::string strip_metadata(std::string_view meaning) {
  std::string s(meaning);
  if (auto p = s.find("(prov"); p != std::string::npos) s.erase(p);
  if (auto p = s.find(':'); p != std::string::npos) s.erase(p);
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '[') {
      auto close = s.find(']', i);
      if (close != std::string::npos) { i = close; continue; }
    }
    if (s[i] == '(') {
      auto close = s.find(')', i);
      if (close != std::string::npos && is_label_parenthetical(std::string_view(s).substr(i + 1, close - i - 1))) {
        i = close;
        continue;
      }
    }
    out += s[i];
  }
  out = text::collapse_whitespace(out);
  while (!out.empty() && (out.back() == '.' || out.back() == ';' || out.back() == ',' || out.back() == ' '))
    out.pop_back();
  while (!out.empty() && (out.front() == ',' || out.front() == ';' || out.front() == ' ')) out.erase(0, 1);
  return text::nfc(out);
}

inline bool is_cross_reference(std::string_view d) {
  return d.starts_with("see ") || d.starts_with("cf ") || d.starts_with("cf. ");
}

}  // namespace detail

struct ParseResult {
  std::vector<LexicalRecord> records;
  std::vector<ParseWarning> warnings;
  /// Number of (meaning, concord) pairs encountered; each yields a record or a dropping warning.
  std::size_t slots = 0;
};

inline ParseResult parse_entry_page(const RawEntry& raw, const CorrectionTable& corrections) {
  if (raw.body.empty()) throw std::invalid_argument("empty page body: " + raw.source_url);
  ParseResult result;
  auto warn = [&](WarningKind k, const std::string& entry, std::string msg) {
    result.warnings.push_back({k, entry, raw.source_url, std::move(msg)});
  };

  auto heads = detail::elements(raw.body, "<h2 class=\"headword\"", "</h2>");
  if (heads.size() != 1) {
    warn(WarningKind::Unparseable, "", "expected exactly one headword, found " + std::to_string(heads.size()));
    return result;
  }
  std::string entry = text::nfc(text::collapse_whitespace(
      corrections.apply(detail::decode_entities(detail::strip_tags(heads[0])), CorrectionScope::Entry)));
  if (entry.empty()) {
    warn(WarningKind::Unparseable, "", "empty headword");
    return result;
  }

  auto senses = detail::elements(raw.body, "<p class=\"sense\"", "</p>");
  if (senses.empty()) {
    warn(WarningKind::Unparseable, entry, "no sense blocks");
    return result;
  }

  for (const auto& block : senses) {
    std::string t = text::collapse_whitespace(detail::decode_entities(detail::strip_tags(block)));
    t = corrections.apply(t, CorrectionScope::Definition);
    // "<pos> (<concords>) <meanings>"
    auto open = t.find('(');
    auto close = t.find(')', open == std::string::npos ? 0 : open);
    if (open == std::string::npos || close == std::string::npos) {
      warn(WarningKind::Unparseable, entry, "sense block without concord: '" + t + "'");
      continue;
    }
    std::string pos = text::trim(std::string_view(t).substr(0, open));
    std::string concord_field = corrections.apply(t.substr(open + 1, close - open - 1), CorrectionScope::Concord);
    std::vector<ClassLabel> labels;
    std::size_t s = 0;
    for (;;) {
      auto comma = concord_field.find(',', s);
      std::string marker = text::trim(std::string_view(concord_field).substr(s, comma == std::string::npos ? std::string::npos : comma - s));
      if (!marker.empty()) labels.push_back(ClassLabel::parse(marker));
      if (comma == std::string::npos) break;
      s = comma + 1;
    }
    auto meanings = detail::split_meanings(std::string_view(t).substr(close + 1));
    if (labels.empty()) {
      warn(WarningKind::Unparseable, entry, "empty concord field");
      continue;
    }
    result.slots += labels.size() * meanings.size();
    if (pos != "n") {
      for (std::size_t i = 0; i < labels.size() * meanings.size(); ++i)
        warn(WarningKind::NotANoun, entry, "part of speech '" + pos + "'");
      continue;
    }
    for (const auto& label : labels)
      if (label.is_other()) warn(WarningKind::UnknownConcord, entry, "unknown subject concord '" + label.name() + "'");
    for (std::size_t m = 0; m < meanings.size(); ++m) {
      std::string def = detail::strip_metadata(meanings[m]);
      for (const auto& label : labels) {
        if (def.empty()) {
          warn(WarningKind::EmptyDefinition, entry, "meaning " + std::to_string(m + 1) + " is empty after stripping");
        } else if (detail::is_cross_reference(def)) {
          warn(WarningKind::CrossReference, entry, "meaning " + std::to_string(m + 1) + " is a cross-reference: '" + def + "'");
        } else {
          result.records.push_back({0, entry, def, label});
        }
      }
    }
  }
  return result;
}

/// Sorts by (entry, definition, concord), removes duplicate triples and assigns record ids.
inline std::vector<LexicalRecord> assemble_dataset(std::vector<LexicalRecord> records, std::vector<ParseWarning>* warnings = nullptr) {
  auto key = [](const LexicalRecord& r) { return std::make_tuple(std::cref(r.entry), std::cref(r.definition), r.class_label.name()); };
  std::sort(records.begin(), records.end(), [&](const auto& a, const auto& b) { return key(a) < key(b); });
  std::vector<LexicalRecord> out;
  for (auto& r : records) {
    if (!out.empty() && key(out.back()) == key(r)) {
      if (warnings) warnings->push_back({WarningKind::Duplicate, r.entry, "", "duplicate record '" + r.definition + "' (" + r.class_label.name() + ")"});
      continue;
    }
    out.push_back(std::move(r));
  }
  for (std::size_t i = 0; i < out.size(); ++i) out[i].record_id = i;
  return out;
}

inline std::map<ClassLabel, std::size_t> class_distribution(const std::vector<LexicalRecord>& records) {
  std::map<ClassLabel, std::size_t> counts;
  for (const auto& r : records) ++counts[r.class_label];
  return counts;
}

struct DistributionStats {
  /// Per-class counts over the input, most frequent first (ties by concord name).
  std::vector<std::pair<ClassLabel, std::size_t>> counts;
  std::vector<ClassLabel> retained_classes;
  std::size_t total = 0;
  std::size_t retained = 0;
  double retained_fraction = 0.0;
};

struct FilterResult {
  std::vector<LexicalRecord> records;
  DistributionStats stats;
  std::vector<std::string> warnings;
};

inline FilterResult filter_top_classes(const std::vector<LexicalRecord>& records, std::size_t k) {
  if (k < 1) throw std::invalid_argument("filter_top_classes: k must be >= 1");
  FilterResult out;
  auto dist = class_distribution(records);
  out.stats.counts.assign(dist.begin(), dist.end());
  std::sort(out.stats.counts.begin(), out.stats.counts.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first.name() < b.first.name();
  });
  if (out.stats.counts.size() < k)
    out.warnings.push_back("only " + std::to_string(out.stats.counts.size()) + " distinct classes for top-" +
                           std::to_string(k) + "; keeping all");
  std::set<ClassLabel> keep;
  for (std::size_t i = 0; i < std::min(k, out.stats.counts.size()); ++i) {
    keep.insert(out.stats.counts[i].first);
    out.stats.retained_classes.push_back(out.stats.counts[i].first);
  }
  for (const auto& r : records)
    if (keep.count(r.class_label)) out.records.push_back(r);
  out.stats.total = records.size();
  out.stats.retained = out.records.size();
  out.stats.retained_fraction = records.empty() ? 0.0 : static_cast<double>(out.stats.retained) / static_cast<double>(records.size());
  return out;
}

// ---------------------------------------------------------------------------
// NDJSON

inline std::string to_ndjson(const std::vector<LexicalRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    nlohmann::ordered_json j;
    j["entry"] = r.entry;
    j["definition"] = r.definition;
    j["subject_concord"] = r.class_label.name();
    j["record_id"] = r.record_id;
    out += j.dump();
    out += '\n';
  }
  return out;
}

inline std::vector<LexicalRecord> from_ndjson(std::string_view contents) {
  std::vector<LexicalRecord> records;
  auto lines = io::split_lines(contents);
  for (std::size_t n = 0; n < lines.size(); ++n) {
    if (lines[n].empty()) continue;
    try {
      auto j = nlohmann::json::parse(lines[n]);
      records.push_back({j.at("record_id").get<std::uint64_t>(), j.at("entry").get<std::string>(),
                         j.at("definition").get<std::string>(), ClassLabel::parse(j.at("subject_concord").get<std::string>())});
    } catch (const nlohmann::json::exception& e) {
      throw std::runtime_error("records line " + std::to_string(n + 1) + ": " + e.what());
    }
  }
  return records;
}

}  // namespace nounclass::lexicon

#endif  // NOUNCLASS_LEXICON_HPP_
