#include <algorithm>
#include <set>

#include "conquer/error.hpp"
#include "conquer/evaluation/evaluation.hpp"
#include "conquer/text.hpp"

namespace conquer::evaluation {
namespace {

struct Fence {
  std::size_t body = std::string::npos;  // first byte after the opening tag
  std::string close;
};

// Last opening ```json or '''json (tag case-insensitive).
Fence last_fence(const std::string& raw) {
  const std::string lower = text::to_lower(raw);
  Fence best;
  for (const char* tag : {"```json", "'''json"}) {
    auto pos = lower.rfind(tag);
    if (pos == std::string::npos) continue;
    if (best.body == std::string::npos || pos + 7 > best.body) best = {pos + 7, std::string(tag, 3)};
  }
  return best;
}

// Last top-level balanced {...}; string literals are only tracked inside
// braces so stray quotes in prose do not derail the scan.
std::optional<std::string> last_object(const std::string& raw) {
  std::optional<std::string> found;
  int depth = 0;
  bool in_string = false, escaped = false;
  std::size_t start = 0;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const char c = raw[i];
    if (in_string) {
      if (escaped) escaped = false;
      else if (c == '\\') escaped = true;
      else if (c == '"') in_string = false;
      continue;
    }
    if (c == '"' && depth > 0) in_string = true;
    else if (c == '{') {
      if (depth++ == 0) start = i;
    } else if (c == '}' && depth > 0) {
      if (--depth == 0) found = raw.substr(start, i - start + 1);
    }
  }
  return found;
}

}  // namespace

std::vector<std::string> dimension_labels() {
  std::vector<std::string> out;
  for (auto d : kDimensions) out.emplace_back(dimension_label(d));
  return out;
}

std::map<std::string, int> parse_judge_json(const std::string& raw, const std::vector<std::string>& expected_keys,
                                            int lo, int hi) {
  std::string candidate;
  if (auto fence = last_fence(raw); fence.body != std::string::npos) {
    auto end = raw.find(fence.close, fence.body);
    candidate = raw.substr(fence.body, end == std::string::npos ? std::string::npos : end - fence.body);
  } else if (auto obj = last_object(raw)) {
    candidate = *obj;
  } else {
    throw Error(Errc::NoJsonFound, "no fenced json block or object literal in judge output");
  }

  auto j = nlohmann::json::parse(candidate, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw Error(Errc::NoJsonFound, "judge answer is not a JSON object");

  for (const auto& key : expected_keys)
    if (!j.contains(key)) throw Error(Errc::MissingKey, key);
  const std::set<std::string> expected(expected_keys.begin(), expected_keys.end());
  for (const auto& [key, _] : j.items())
    if (!expected.count(key)) throw Error(Errc::UnexpectedKey, key);

  std::map<std::string, int> out;
  for (const auto& key : expected_keys) {
    const auto& v = j[key];
    if (!v.is_number_integer())
      throw Error(Errc::ValueOutOfDomain, key + " = " + v.dump() + " is not an integer");
    const auto n = v.get<long long>();
    if (n < lo || n > hi)
      throw Error(Errc::ValueOutOfDomain,
                  key + " = " + std::to_string(n) + " outside [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    out[key] = static_cast<int>(n);
  }
  return out;
}

}  // namespace conquer::evaluation
