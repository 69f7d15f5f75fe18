#pragma once

// Text records, tweet normalization, tokenization and n-gram count features.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "alcrowd/error.hpp"
#include "alcrowd/io.hpp"

namespace alcrowd::corpus {

struct Document {
  std::string id;
  std::string raw_text;
  std::string norm_text;
  std::optional<int> label;  // 1 = job-loss event, 0 = not
  std::optional<std::string> lang;
  std::optional<std::string> source;
};

struct SparseEntry {
  std::uint32_t index;
  double weight;
  bool operator==(const SparseEntry&) const = default;
};

// Sorted by index, no duplicates, strictly positive weights.
struct SparseVector {
  std::vector<SparseEntry> entries;

  bool empty() const { return entries.empty(); }
  std::size_t size() const { return entries.size(); }

  double at(std::uint32_t index) const {
    auto it = std::lower_bound(entries.begin(), entries.end(), index,
                               [](const SparseEntry& e, std::uint32_t i) { return e.index < i; });
    return (it != entries.end() && it->index == index) ? it->weight : 0.0;
  }

  bool operator==(const SparseVector&) const = default;
};

struct VocabParams {
  int ngram_min = 1;
  int ngram_max = 2;
  int min_df = 2;
};

class Vocabulary {
 public:
  Vocabulary() = default;
  Vocabulary(std::vector<std::string> ngrams, VocabParams params)
      : ngrams_(std::move(ngrams)), params_(params) {
    index_.reserve(ngrams_.size());
    for (std::size_t i = 0; i < ngrams_.size(); ++i)
      index_.emplace(ngrams_[i], static_cast<std::uint32_t>(i));
  }

  std::size_t size() const { return ngrams_.size(); }
  const VocabParams& params() const { return params_; }
  const std::vector<std::string>& ngrams() const { return ngrams_; }

  std::optional<std::uint32_t> find(const std::string& ngram) const {
    auto it = index_.find(ngram);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

 private:
  std::vector<std::string> ngrams_;  // position == column index
  std::unordered_map<std::string, std::uint32_t> index_;
  VocabParams params_;
};

namespace detail {

// Decodes one UTF-8 sequence starting at s[i]; advances i. Invalid bytes are
// returned as their own value so the text passes through unchanged.
inline char32_t next_codepoint(std::string_view s, std::size_t& i, std::size_t& len) {
  const auto b0 = static_cast<unsigned char>(s[i]);
  auto cont = [&](std::size_t k) {
    return i + k < s.size() && (static_cast<unsigned char>(s[i + k]) & 0xC0) == 0x80;
  };
  char32_t cp = b0;
  len = 1;
  if (b0 >= 0xC2 && b0 <= 0xDF && cont(1)) {
    cp = ((b0 & 0x1F) << 6) | (s[i + 1] & 0x3F);
    len = 2;
  } else if (b0 >= 0xE0 && b0 <= 0xEF && cont(1) && cont(2)) {
    cp = ((b0 & 0x0F) << 12) | ((s[i + 1] & 0x3F) << 6) | (s[i + 2] & 0x3F);
    len = 3;
  } else if (b0 >= 0xF0 && b0 <= 0xF4 && cont(1) && cont(2) && cont(3)) {
    cp = ((b0 & 0x07) << 18) | ((s[i + 1] & 0x3F) << 12) | ((s[i + 2] & 0x3F) << 6) |
         (s[i + 3] & 0x3F);
    len = 4;
  }
  i += len;
  return cp;
}

inline void append_utf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

inline bool is_emoji(char32_t cp) {
  if (cp >= 0x1F3FB && cp <= 0x1F3FF) return false;  // skin tones are modifiers
  return (cp >= 0x1F300 && cp <= 0x1F5FF) ||  // misc symbols and pictographs
         (cp >= 0x1F600 && cp <= 0x1F64F) ||  // emoticons
         (cp >= 0x1F680 && cp <= 0x1F6FF) ||  // transport and map
         (cp >= 0x1F900 && cp <= 0x1F9FF);    // supplemental symbols and pictographs
}

// Joiners and presentation modifiers that only decorate a neighbouring emoji.
inline bool is_emoji_modifier(char32_t cp) {
  return (cp >= 0xFE00 && cp <= 0xFE0F) || cp == 0x200D || (cp >= 0x1F3FB && cp <= 0x1F3FF);
}

inline bool is_space(char32_t cp) {
  return cp == ' ' || cp == '\t' || cp == '\n' || cp == '\r' || cp == '\f' || cp == '\v';
}

// Characters allowed in a hashtag body or user name.
inline bool is_word(char32_t cp) {
  if (cp < 0x80) return (cp >= '0' && cp <= '9') || (cp >= 'a' && cp <= 'z') ||
                        (cp >= 'A' && cp <= 'Z') || cp == '_';
  return !is_emoji(cp) && !is_emoji_modifier(cp) && cp != 0x00A0 && !(cp >= 0x2000 && cp <= 0x206F);
}

inline char32_t to_lower(char32_t cp) {
  if (cp >= 'A' && cp <= 'Z') return cp + 32;
  if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return cp + 32;
  return cp;
}

inline bool starts_with_ci(std::string_view s, std::size_t pos, std::string_view prefix) {
  if (s.size() - pos < prefix.size()) return false;
  for (std::size_t k = 0; k < prefix.size(); ++k) {
    char c = s[pos + k];
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c + 32);
    if (c != prefix[k]) return false;
  }
  return true;
}

}  // namespace detail

inline constexpr std::string_view kHashtagToken = "<hashtag>";
inline constexpr std::string_view kUserToken = "<user>";
inline constexpr std::string_view kUrlToken = "<url>";
inline constexpr std::string_view kEmojiToken = "<emoji>";

// Replaces URLs, user mentions, hashtags and emoji with placeholder tokens,
// lowercases, and collapses whitespace. Idempotent.
inline std::string normalize_tweet(std::string_view raw) {
  using namespace detail;
  std::string out;
  out.reserve(raw.size() + 16);
  auto placeholder = [&](std::string_view tok) {
    out.push_back(' ');
    out.append(tok);
    out.push_back(' ');
  };

  std::size_t i = 0;
  while (i < raw.size()) {
    if (starts_with_ci(raw, i, "http://") || starts_with_ci(raw, i, "https://")) {
      while (i < raw.size()) {
        std::size_t j = i, len = 0;
        if (is_space(next_codepoint(raw, j, len))) break;
        i = j;
      }
      placeholder(kUrlToken);
      continue;
    }
    std::size_t len = 0;
    std::size_t j = i;
    const char32_t cp = next_codepoint(raw, j, len);
    if (cp == '#' || cp == '@') {
      std::string body;
      std::size_t k = j;
      while (k < raw.size()) {
        std::size_t k2 = k, l2 = 0;
        char32_t c2 = next_codepoint(raw, k2, l2);
        if (!is_word(c2)) break;
        // A URL inside a body starts a new match.
        if (starts_with_ci(raw, k, "http://") || starts_with_ci(raw, k, "https://")) break;
        append_utf8(body, to_lower(c2));
        k = k2;
      }
      if (body.empty()) {
        // Bare '#' is dropped; bare '@' stays as text, split off from what follows.
        if (cp == '@') out.append("@ ");
        else out.push_back(' ');
      } else if (cp == '#') {
        out.push_back(' ');
        out.append(kHashtagToken);
        out.push_back(' ');
        out.append(body);
        out.push_back(' ');
      } else {
        placeholder(kUserToken);
      }
      i = k;
      continue;
    }
    if (is_emoji(cp)) {
      placeholder(kEmojiToken);
    } else if (is_emoji_modifier(cp) || is_space(cp)) {
      out.push_back(' ');
    } else if (len == 1 && cp >= 0x80) {
      out.push_back(raw[i]);  // invalid byte, passed through
    } else {
      append_utf8(out, to_lower(cp));
    }
    i = j;
  }

  std::string collapsed;
  collapsed.reserve(out.size());
  bool pending_space = false;
  for (char c : out) {
    if (c == ' ') {
      pending_space = !collapsed.empty();
    } else {
      if (pending_space) collapsed.push_back(' ');
      pending_space = false;
      collapsed.push_back(c);
    }
  }
  return collapsed;
}

inline void normalize_all(std::span<Document> docs) {
  for (auto& d : docs) d.norm_text = normalize_tweet(d.raw_text);
}

// Keeps the first record per normalized text (and per id), drops records whose
// language tag is present and not "en". Input order is preserved.
struct FilterStats {
  std::size_t read = 0;
  std::size_t deduped = 0;
  std::size_t dropped_non_english = 0;
  std::size_t written = 0;
};

inline std::vector<Document> dedupe_and_filter(std::span<const Document> docs,
                                               FilterStats* stats = nullptr) {
  std::vector<Document> kept;
  std::unordered_set<std::string> seen_text;
  std::unordered_set<std::string> seen_id;
  FilterStats st;
  st.read = docs.size();
  for (const auto& d : docs) {
    if (d.lang && *d.lang != "en") {
      ++st.dropped_non_english;
      continue;
    }
    if (seen_text.count(d.norm_text) || seen_id.count(d.id)) {
      ++st.deduped;
      continue;
    }
    seen_text.insert(d.norm_text);
    seen_id.insert(d.id);
    kept.push_back(d);
  }
  st.written = kept.size();
  if (stats) *stats = st;
  return kept;
}

inline bool is_placeholder(std::string_view tok) {
  return tok == kHashtagToken || tok == kUserToken || tok == kUrlToken || tok == kEmojiToken;
}

// Whitespace split; ASCII punctuation becomes its own token; placeholder
// tokens are kept whole.
inline std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) tokens.push_back(std::move(cur));
    cur.clear();
  };
  std::size_t i = 0;
  while (i < text.size()) {
    const char c = text[i];
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v') {
      flush();
      ++i;
      continue;
    }
    if (c == '<') {
      bool matched = false;
      for (auto ph : {kHashtagToken, kUserToken, kUrlToken, kEmojiToken}) {
        if (text.substr(i, ph.size()) == ph) {
          flush();
          tokens.emplace_back(ph);
          i += ph.size();
          matched = true;
          break;
        }
      }
      if (matched) continue;
    }
    const auto uc = static_cast<unsigned char>(c);
    if (uc < 0x80 && std::ispunct(uc)) {
      flush();
      tokens.emplace_back(1, c);
    } else {
      cur.push_back(c);
    }
    ++i;
  }
  flush();
  return tokens;
}

namespace detail {

template <typename Fn>
void for_each_ngram(const std::vector<std::string>& tokens, int nmin, int nmax, Fn&& fn) {
  std::string gram;
  for (int n = nmin; n <= nmax; ++n) {
    if (tokens.size() < static_cast<std::size_t>(n)) break;
    for (std::size_t s = 0; s + n <= tokens.size(); ++s) {
      gram.clear();
      for (int k = 0; k < n; ++k) {
        if (k) gram.push_back(' ');
        gram.append(tokens[s + k]);
      }
      fn(gram);
    }
  }
}

inline void check_params(const VocabParams& p) {
  if (p.ngram_min < 1 || p.ngram_max < p.ngram_min || p.min_df < 1)
    throw Error("invalid n-gram parameters: need 1 <= ngram_min <= ngram_max and min_df >= 1");
}

}  // namespace detail

// Every n-gram of order ngram_min..ngram_max with document frequency >= min_df,
// indexed in lexicographic order of the joined n-gram string.
inline Vocabulary build_vocab(std::span<const Document> docs, VocabParams params = {}) {
  detail::check_params(params);
  if (docs.empty()) throw Error("cannot build a vocabulary from an empty corpus");
  std::map<std::string, int> df;
  std::unordered_set<std::string> in_doc;
  for (const auto& d : docs) {
    in_doc.clear();
    detail::for_each_ngram(tokenize(d.norm_text), params.ngram_min, params.ngram_max,
                           [&](const std::string& g) { in_doc.insert(g); });
    for (const auto& g : in_doc) ++df[g];
  }
  std::vector<std::string> grams;
  for (const auto& [g, count] : df)
    if (count >= params.min_df) grams.push_back(g);
  return Vocabulary(std::move(grams), params);
}

// Raw n-gram counts; n-grams outside the vocabulary are ignored.
inline SparseVector vectorize(std::string_view norm_text, const Vocabulary& vocab) {
  std::map<std::uint32_t, double> counts;
  detail::for_each_ngram(tokenize(norm_text), vocab.params().ngram_min, vocab.params().ngram_max,
                         [&](const std::string& g) {
                           if (auto idx = vocab.find(g)) counts[*idx] += 1.0;
                         });
  SparseVector v;
  v.entries.reserve(counts.size());
  for (auto [idx, w] : counts) v.entries.push_back({idx, w});
  return v;
}

inline SparseVector vectorize(const Document& doc, const Vocabulary& vocab) {
  return vectorize(doc.norm_text, vocab);
}

// ---- dataset files (JSON lines) ----

inline Document document_from_json(const io::Json& obj) {
  Document d;
  if (!obj.contains("id") || !obj["id"].is_string()) throw Error("missing string field \"id\"");
  if (!obj.contains("text") || !obj["text"].is_string())
    throw Error("missing string field \"text\"");
  d.id = obj["id"].get<std::string>();
  d.raw_text = obj["text"].get<std::string>();
  if (auto it = obj.find("label"); it != obj.end() && !it->is_null()) {
    if (!it->is_number_integer() || (it->get<long long>() != 0 && it->get<long long>() != 1))
      throw Error("\"label\" must be 0 or 1");
    d.label = it->get<int>();
  }
  if (auto it = obj.find("lang"); it != obj.end() && !it->is_null()) {
    if (!it->is_string()) throw Error("\"lang\" must be a string");
    d.lang = it->get<std::string>();
  }
  if (auto it = obj.find("source"); it != obj.end() && !it->is_null()) {
    if (!it->is_string()) throw Error("\"source\" must be a string");
    d.source = it->get<std::string>();
  }
  return d;
}

// The written "text" is the normalized text; re-normalizing it is a no-op.
inline io::Json document_to_json(const Document& d) {
  io::Json obj = io::Json::object();
  obj["id"] = d.id;
  obj["text"] = d.norm_text;
  if (d.label) obj["label"] = *d.label;
  if (d.lang) obj["lang"] = *d.lang;
  if (d.source) obj["source"] = *d.source;
  return obj;
}

// Reads a dataset file and fills norm_text for every record.
inline std::vector<Document> read_dataset(const std::filesystem::path& path) {
  std::vector<Document> docs;
  io::for_each_jsonl(path, [&](std::size_t, const io::Json& obj) {
    docs.push_back(document_from_json(obj));
  });
  normalize_all(docs);
  return docs;
}

inline std::string dataset_to_jsonl(std::span<const Document> docs) {
  std::string out;
  for (const auto& d : docs) {
    out += document_to_json(d).dump(-1, ' ', false, io::Json::error_handler_t::replace);
    out += '\n';
  }
  return out;
}

}  // namespace alcrowd::corpus
