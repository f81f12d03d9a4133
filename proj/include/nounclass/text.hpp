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

#ifndef NOUNCLASS_TEXT_HPP_
#define NOUNCLASS_TEXT_HPP_

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

#include <openssl/evp.h>
#include <unicode/locid.h>
#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>

namespace nounclass::text {

/// Unicode NFC normalization of a UTF-8 string.
inline std::string nfc(std::string_view utf8) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* normalizer = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) throw std::runtime_error("ICU NFC normalizer unavailable");
  icu::UnicodeString src = icu::UnicodeString::fromUTF8(icu::StringPiece(utf8.data(), static_cast<int32_t>(utf8.size())));
  icu::UnicodeString out = normalizer->normalize(src, status);
  if (U_FAILURE(status)) throw std::runtime_error("NFC normalization failed");
  std::string result;
  out.toUTF8String(result);
  return result;
}

inline std::string lowercase(std::string_view utf8) {
  icu::UnicodeString s = icu::UnicodeString::fromUTF8(icu::StringPiece(utf8.data(), static_cast<int32_t>(utf8.size())));
  s.toLower(icu::Locale::getRoot());
  std::string result;
  s.toUTF8String(result);
  return result;
}

/// Replaces every run of Unicode whitespace with one ASCII space and trims both ends.
inline std::string collapse_whitespace(std::string_view utf8) {
  icu::UnicodeString s = icu::UnicodeString::fromUTF8(icu::StringPiece(utf8.data(), static_cast<int32_t>(utf8.size())));
  icu::UnicodeString out;
  bool pending_space = false;
  for (int32_t i = 0; i < s.length();) {
    UChar32 c = s.char32At(i);
    i += U16_LENGTH(c);
    if (u_isUWhiteSpace(c)) {
      pending_space = !out.isEmpty();
      continue;
    }
    if (pending_space) out.append(static_cast<UChar>(u' '));
    pending_space = false;
    out.append(c);
  }
  std::string result;
  out.toUTF8String(result);
  return result;
}

inline std::string trim(std::string_view s) {
  const char* ws = " \t\r\n\f\v";
  auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(ws);
  return std::string(s.substr(b, e - b + 1));
}

inline std::string sha256_hex(std::string_view bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest.data(), &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("SHA-256 digest failed");
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xf]);
  }
  return out;
}

/// Form under which definitions and glosses are embedded and deduplicated.
inline std::string keying_form(std::string_view utf8) {
  return lowercase(nfc(collapse_whitespace(utf8)));
}

/// 64-hex SHA-256 of the NFC-normalized, whitespace-collapsed text.
class EmbeddingKey {
 public:
  EmbeddingKey() = default;

  static EmbeddingKey of_text(std::string_view utf8) {
    return EmbeddingKey(sha256_hex(nfc(collapse_whitespace(utf8))));
  }

  static EmbeddingKey from_hex(std::string_view hex) {
    if (!is_valid_hex(hex)) throw std::invalid_argument("invalid embedding key: '" + std::string(hex) + "'");
    return EmbeddingKey(std::string(hex));
  }

  static bool is_valid_hex(std::string_view hex) {
    if (hex.size() != 64) return false;
    for (char c : hex)
      if (!((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'))) return false;
    return true;
  }

  const std::string& hex() const { return hex_; }

  friend auto operator<=>(const EmbeddingKey&, const EmbeddingKey&) = default;

 private:
  explicit EmbeddingKey(std::string hex) : hex_(std::move(hex)) {}
  std::string hex_;
};

}  // namespace nounclass::text

template <>
struct std::hash<nounclass::text::EmbeddingKey> {
  std::size_t operator()(const nounclass::text::EmbeddingKey& k) const noexcept {
    return std::hash<std::string>{}(k.hex());
  }
};

#endif  // NOUNCLASS_TEXT_HPP_
