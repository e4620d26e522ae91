#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

// Small string helpers shared by the parsers, the mock backend and the
// stopword filter.
namespace conquer::text {

std::string trim(std::string_view s);
std::string to_lower(std::string_view s);
bool starts_with_ci(std::string_view s, std::string_view prefix);

/// Collapses runs of whitespace to one space and trims; used for
/// equality checks that must ignore formatting.
std::string normalize_space(std::string_view s);

std::vector<std::string> split_lines(std::string_view s);
std::vector<std::string> split_whitespace(std::string_view s);

/// Replaces `{name}` placeholders in a single left-to-right pass. Unknown
/// braces are left untouched and substituted values are never rescanned.
std::string render_template(std::string_view tmpl,
                            const std::vector<std::pair<std::string, std::string>>& values);

/// Whitespace-split words, lowercased, with ASCII punctuation removed
/// ("doesn't" -> "doesnt", "water?" -> "water"). Words that end up empty
/// are dropped.
std::vector<std::string> content_tokens(std::string_view s);

/// Bundled English stopword list (fixed, versioned with the source).
const std::vector<std::string>& stopwords();
bool is_stopword(std::string_view lowered_word);

/// FNV-1a 64, used only for deterministic mock behavior.
std::uint64_t fnv1a64(std::string_view s, std::uint64_t seed = 0);
std::uint64_t splitmix64(std::uint64_t& state);

/// Fixed-point formatting for reports ("%.Nf").
std::string format_fixed(double value, int decimals);

}  // namespace conquer::text
