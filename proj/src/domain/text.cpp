#include "conquer/text.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <unordered_set>

namespace conquer::text {
namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

// NLTK's English list with the apostrophe contractions removed, plus a few
// interrogatives/auxiliaries common in student questions. Words such as
// "get", "enough" or "happens" are deliberately absent.
const char* const kStopwords[] = {
    "i",          "me",       "my",        "myself",   "we",       "our",      "ours",     "ourselves",
    "you",        "your",     "yours",     "yourself", "yourselves", "he",     "him",      "his",
    "himself",    "she",      "her",       "hers",     "herself",  "it",       "its",      "itself",
    "they",       "them",     "their",     "theirs",   "themselves", "what",   "which",    "who",
    "whom",       "this",     "that",      "these",    "those",    "am",       "is",       "are",
    "was",        "were",     "be",        "been",     "being",    "have",     "has",      "had",
    "having",     "do",       "does",      "did",      "doing",    "a",        "an",       "the",
    "and",        "but",      "if",        "or",       "because",  "as",       "until",    "while",
    "of",         "at",       "by",        "for",      "with",     "about",    "against",  "between",
    "into",       "through",  "during",    "before",   "after",    "above",    "below",    "to",
    "from",       "up",       "down",      "in",       "out",      "on",       "off",      "over",
    "under",      "again",    "further",   "then",     "once",     "here",     "there",    "when",
    "where",      "why",      "how",       "all",      "any",      "both",     "each",     "few",
    "more",       "most",     "other",     "some",     "such",     "no",       "nor",      "not",
    "only",       "own",      "same",      "so",       "than",     "too",      "very",     "s",
    "t",          "can",      "will",      "just",     "don",      "should",   "now",      "d",
    "ll",         "m",        "o",         "re",       "ve",       "y",        "ain",      "aren",
    "couldn",     "didn",     "doesn",     "hadn",     "hasn",     "haven",    "isn",      "ma",
    "mightn",     "mustn",    "needn",     "shan",     "shouldn",  "wasn",     "weren",    "won",
    "wouldn",     "would",    "could",     "might",    "must",     "shall",    "may",      "also",
    "within",     "without",  "upon",      "among",    "whether",  "whose",    "yet",      "us",
};

}  // namespace

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && is_space(s[b])) ++b;
  while (e > b && is_space(s[e - 1])) --e;
  return std::string(s.substr(b, e - b));
}

std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

bool starts_with_ci(std::string_view s, std::string_view prefix) {
  if (s.size() < prefix.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(s[i])) != std::tolower(static_cast<unsigned char>(prefix[i])))
      return false;
  }
  return true;
}

std::string normalize_space(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending = false;
  for (char c : s) {
    if (is_space(c)) {
      pending = !out.empty();
      continue;
    }
    if (pending) out.push_back(' ');
    pending = false;
    out.push_back(c);
  }
  return out;
}

std::vector<std::string> split_lines(std::string_view s) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start <= s.size()) {
    std::size_t nl = s.find('\n', start);
    if (nl == std::string_view::npos) nl = s.size();
    std::string_view line = s.substr(start, nl - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.emplace_back(line);
    start = nl + 1;
  }
  return lines;
}

std::vector<std::string> split_whitespace(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && is_space(s[i])) ++i;
    std::size_t j = i;
    while (j < s.size() && !is_space(s[j])) ++j;
    if (j > i) out.emplace_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

std::string render_template(std::string_view tmpl,
                            const std::vector<std::pair<std::string, std::string>>& values) {
  std::string out;
  out.reserve(tmpl.size() + 256);
  std::size_t i = 0;
  while (i < tmpl.size()) {
    if (tmpl[i] == '{') {
      std::size_t close = tmpl.find('}', i + 1);
      if (close != std::string_view::npos) {
        std::string_view name = tmpl.substr(i + 1, close - i - 1);
        auto it = std::find_if(values.begin(), values.end(), [&](const auto& kv) { return kv.first == name; });
        if (it != values.end()) {
          out += it->second;
          i = close + 1;
          continue;
        }
      }
    }
    out.push_back(tmpl[i]);
    ++i;
  }
  return out;
}

std::vector<std::string> content_tokens(std::string_view s) {
  std::vector<std::string> out;
  for (const auto& word : split_whitespace(s)) {
    std::string cleaned;
    for (unsigned char c : word) {
      if (std::ispunct(c)) continue;
      cleaned.push_back(static_cast<char>(std::tolower(c)));
    }
    if (!cleaned.empty()) out.push_back(std::move(cleaned));
  }
  return out;
}

const std::vector<std::string>& stopwords() {
  static const std::vector<std::string> list(std::begin(kStopwords), std::end(kStopwords));
  return list;
}

bool is_stopword(std::string_view lowered_word) {
  static const std::unordered_set<std::string_view> set(std::begin(kStopwords), std::end(kStopwords));
  return set.count(lowered_word) != 0;
}

std::uint64_t fnv1a64(std::string_view s, std::uint64_t seed) {
  std::uint64_t h = 0xcbf29ce484222325ULL ^ (seed * 0x9e3779b97f4a7c15ULL);
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::string format_fixed(double value, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, value);
  std::string out(buf);
  // "-0.00" reads as a sign error in a report
  if (out.find_first_not_of("-0.") == std::string::npos && out.front() == '-') out.erase(0, 1);
  return out;
}

}  // namespace conquer::text
