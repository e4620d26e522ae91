#include "conquer/llm/mock_backend.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>
#include <unordered_set>

#include "conquer/text.hpp"

namespace conquer::llm {
namespace {

constexpr const char* kDistractors[] = {"Friction",     "Magnetism",     "Erosion",      "Inflation",
                                        "Symmetry",     "Oxidation",     "Refraction",   "Sedimentation",
                                        "Fermentation", "Condensation",  "Polarization", "Photoperiodism"};

constexpr const char* kTopics[] = {"energy", "water",  "light",   "cell",     "structure",
                                   "system", "adaptation", "growth",  "environment", "motion",
                                   "force",  "pattern", "evidence", "model",   "theory"};

constexpr const char* kFallbackTerms[] = {"concept", "principle", "process", "example", "mechanism", "definition"};

const std::unordered_set<std::string>& boilerplate() {
  static const std::unordered_set<std::string> words = [] {
    std::unordered_set<std::string> w{"quiz", "following", "closely", "related"};
    for (const char* d : kDistractors) w.insert(text::to_lower(d));
    return w;
  }();
  return words;
}

class Rng {
 public:
  explicit Rng(std::uint64_t state) : state_(state) {}
  std::uint64_t next() { return text::splitmix64(state_); }
  std::size_t below(std::size_t n) { return n == 0 ? 0 : static_cast<std::size_t>(next() % n); }
  double unit() { return static_cast<double>(next() >> 11) * (1.0 / 9007199254740992.0); }

 private:
  std::uint64_t state_;
};

std::string between(const std::string& s, const std::string& open, const std::string& close, bool last_open = false) {
  auto b = last_open ? s.rfind(open) : s.find(open);
  if (b == std::string::npos) return {};
  b += open.size();
  auto e = close.empty() ? std::string::npos : s.find(close, b);
  return s.substr(b, e == std::string::npos ? std::string::npos : e - b);
}

std::string line_after(const std::string& s, const std::string& marker) {
  auto b = s.rfind(marker);
  if (b == std::string::npos) return {};
  b += marker.size();
  auto e = s.find('\n', b);
  return text::trim(s.substr(b, e == std::string::npos ? std::string::npos : e - b));
}

std::string capitalize(std::string s) {
  if (!s.empty()) s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
  return s;
}

bool all_alpha(const std::string& s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isalpha(c) != 0; });
}

std::vector<std::string> key_terms(const std::string& source, std::size_t min_len = 4) {
  std::vector<std::string> out;
  std::unordered_set<std::string> seen;
  for (auto& tok : text::content_tokens(source)) {
    if (tok.size() < min_len || !all_alpha(tok) || text::is_stopword(tok) || boilerplate().count(tok)) continue;
    if (seen.insert(tok).second) out.push_back(tok);
  }
  return out;
}

void shuffle(std::vector<std::string>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng.below(i)]);
}

// area / level as rendered by the shipped templates
std::pair<std::string, std::string> area_and_level(const std::string& prompt) {
  std::string area = between(prompt, "studying ", " at the ");
  std::string level = between(prompt, "studying " + area + " at the ", " level");
  return {area, level};
}

std::string json_block(const std::vector<std::pair<std::string, int>>& entries) {
  std::ostringstream out;
  out << "```json\n{\n";
  for (std::size_t i = 0; i < entries.size(); ++i) {
    out << "\"" << entries[i].first << "\": " << entries[i].second << (i + 1 < entries.size() ? ",\n" : "\n");
  }
  out << "}\n```";
  return out.str();
}

const char* const kDimensionLabels[] = {"Educational Value", "Diversity", "Area Relevance",
                                        "Difficulty Appropriateness", "Comprehensiveness"};

std::string quiz_reply(const std::string& prompt, Rng& rng) {
  const std::string question = line_after(prompt, "Student Question: ");
  std::string context;
  if (prompt.find("Reference Wikipedia Information:\n") != std::string::npos)
    context = between(prompt, "Reference Wikipedia Information:\n", "\n\nStudent Question:", true);

  std::vector<std::string> qterms = key_terms(question);
  std::vector<std::string> cterms = key_terms(context);
  shuffle(cterms, rng);
  for (const char* f : kFallbackTerms) {
    if (qterms.size() >= 2) break;
    qterms.emplace_back(f);
  }

  std::ostringstream out;
  for (std::size_t i = 0; i < 3; ++i) {
    std::string stem;
    std::string answer;
    if (!context.empty() && cterms.size() >= 3) {
      const std::size_t n = cterms.size();
      stem = "Which of the following is most closely related to " + cterms[(3 * i) % n] + " and " +
             cterms[(3 * i + 1) % n] + "?";
      answer = cterms[(3 * i + 2) % n];
    } else {
      const std::size_t n = qterms.size();
      stem = "Which of the following is most closely related to " + qterms[(2 * i) % n] + "?";
      answer = qterms[(2 * i + 1) % n];
    }
    std::vector<std::string> options{capitalize(answer)};
    std::size_t start = rng.below(std::size(kDistractors));
    for (std::size_t k = 0; options.size() < 4; ++k) {
      std::string d = kDistractors[(start + k) % std::size(kDistractors)];
      if (text::to_lower(d) == text::to_lower(answer)) continue;
      options.push_back(d);
    }
    out << "[Quiz]\nQuiz: " << stem << "\n";
    for (std::size_t k = 0; k < 4; ++k) out << static_cast<char>('A' + k) << ". " << options[k] << "\n";
    out << "\n";
  }
  return out.str();
}

std::string concepts_reply(const std::string& prompt) {
  // topic words first, then longer words; at most four
  auto terms = key_terms(line_after(prompt, "Student Question: "));
  auto is_topic = [](const std::string& t) {
    return std::any_of(std::begin(kTopics), std::end(kTopics), [&](const char* k) { return t == k; });
  };
  std::stable_sort(terms.begin(), terms.end(), [&](const auto& a, const auto& b) {
    if (is_topic(a) != is_topic(b)) return is_topic(a);
    return a.size() > b.size();
  });
  if (terms.size() > 4) terms.resize(4);
  if (terms.empty()) terms.emplace_back("concept");
  std::string out;
  for (std::size_t i = 0; i < terms.size(); ++i) out += (i ? ", " : "") + terms[i];
  return out;
}

std::string summary_reply(const std::string& prompt, int max_tokens) {
  std::string section = between(prompt, "Reference Information:\n", "\n\nStudent Question:", false);
  std::vector<std::string> words;
  std::string block;
  std::istringstream in(section);
  std::string line;
  std::vector<std::string> paragraphs;
  while (std::getline(in, line)) {
    if (text::starts_with_ci(line, "Source:")) {
      if (!block.empty()) paragraphs.push_back(block);
      block.clear();
      continue;
    }
    block += " " + line;
  }
  if (!block.empty()) paragraphs.push_back(block);

  std::string out;
  for (const auto& p : paragraphs) {
    auto w = text::split_whitespace(p);
    if (w.empty()) continue;
    w.resize(std::min<std::size_t>(w.size(), 20));
    std::string sentence;
    for (const auto& x : w) sentence += (sentence.empty() ? "" : " ") + x;
    while (!sentence.empty() && std::ispunct(static_cast<unsigned char>(sentence.back()))) sentence.pop_back();
    out += (out.empty() ? "" : " ") + sentence + ".";
  }
  if (out.empty()) out = "The reference information does not contain specific key points.";
  auto tokens = text::split_whitespace(out);
  if (max_tokens > 0 && tokens.size() > static_cast<std::size_t>(max_tokens)) {
    tokens.resize(static_cast<std::size_t>(max_tokens));
    out.clear();
    for (const auto& t : tokens) out += (out.empty() ? "" : " ") + t;
  }
  return out;
}

std::string judge_reply(const std::string& prompt, Rng& rng) {
  const std::string set = between(prompt, "Here is the quiz set related to the question:\n", "\n\nPlease start", false);
  const std::size_t r = mock_richness(set);
  std::ostringstream out;
  out << "Step-by-step analysis:\n"
      << "1. The quiz set contains " << r << " distinct key terms.\n"
      << "2. Each quiz has one correct answer in option A and three distractors.\n\n";
  std::vector<std::pair<std::string, int>> scores;
  for (std::size_t d = 0; d < 5; ++d) {
    double base = 1.0 + static_cast<double>(r) / 2.5;
    if (d == 1) base -= 1.0;  // diversity is the hardest dimension to max out
    int jitter = 0;
    double u = rng.unit();
    if (u < 0.25) jitter = -1;
    else if (u >= 0.75) jitter = 1;
    int s = static_cast<int>(std::lround(base)) + jitter;
    scores.emplace_back(kDimensionLabels[d], std::clamp(s, 1, 5));
  }
  out << json_block(scores);
  return out.str();
}

std::string pairwise_reply(const std::string& prompt) {
  const std::string s1 = between(prompt, "Here is the quiz set 1:\n", "\n\nHere is the quiz set 2:", false);
  const std::string s2 = between(prompt, "Here is the quiz set 2:\n", "\n\nPlease start", false);
  const std::size_t r1 = mock_richness(s1);
  const std::size_t r2 = mock_richness(s2);
  std::ostringstream out;
  out << "Step-by-step analysis:\nQuiz set 1 covers " << r1 << " distinct key terms; quiz set 2 covers " << r2
      << ".\n\n";
  std::vector<std::pair<std::string, int>> choices;
  for (std::size_t d = 0; d < 5; ++d) {
    int c;
    if (r1 != r2) c = r1 > r2 ? 1 : 2;
    else c = d == 1 ? 1 : 2;  // ties lean to the second candidate except on diversity
    choices.emplace_back(kDimensionLabels[d], c);
  }
  out << json_block(choices);
  return out.str();
}

std::string difficulty_reply(const std::string& prompt) {
  auto [area, level] = area_and_level(prompt);
  int score = 3;
  if (level == "primary school") score = 2;
  else if (level == "PhD") score = 4;
  return "The question requires " + std::string(score <= 2 ? "basic" : score == 3 ? "solid" : "advanced") +
         " knowledge of " + area + ".\n\n" + json_block({{"Difficulty", score}});
}

std::string dataset_reply(const std::string& prompt, Rng& rng) {
  auto [area, level] = area_and_level(prompt);
  std::size_t n = 5;
  try {
    n = std::stoul(between(prompt, "Write ", " representative"));
  } catch (const std::exception&) {
  }
  static const std::vector<std::vector<std::string>> templates = {
      {"What is {t1} and why does it matter in {area}?", "How does {t1} change {t2}?",
       "Why is {t1} important for {t2}?", "Can you explain how {t1} and {t2} are connected?",
       "What happens to {t1} when {t2} changes?"},
      {"How can we use {t1} to explain {t2} in {area}?", "What evidence links {t1} to {t2}?",
       "How do scientists measure the effect of {t1} on {t2}?", "Why does {t1} depend on {t2} in {area}?",
       "What role does {t1} play in {t2}?"},
      {"What are current research methods for modeling {t1} in {area}?",
       "How do competing theories explain the relationship between {t1} and {t2}?",
       "What open problems remain in quantifying {t1} within {t2}?",
       "How does {t1} constrain {t2} in advanced {area} research?",
       "What methodological challenges arise when studying {t1} and {t2}?"}};
  const auto& tmpl = templates[level == "primary school" ? 0 : level == "high school" ? 1 : 2];
  std::ostringstream out;
  std::unordered_set<std::string> seen;
  const std::size_t offset = rng.below(tmpl.size());
  for (std::size_t i = 0; i < n; ++i) {
    std::string q;
    for (int tries = 0; tries < 64; ++tries) {
      std::size_t a = rng.below(std::size(kTopics));
      std::size_t b = (a + 1 + rng.below(std::size(kTopics) - 1)) % std::size(kTopics);
      q = text::render_template(tmpl[(offset + i) % tmpl.size()],
                                {{"t1", kTopics[a]}, {"t2", kTopics[b]}, {"area", area}});
      if (seen.insert(q).second) break;
    }
    out << (i + 1) << ". " << capitalize(q) << "\n";
  }
  return out.str();
}

}  // namespace

std::size_t mock_richness(const std::string& quiz_set_text) { return key_terms(quiz_set_text).size(); }

MockBackend::MockBackend(std::uint64_t seed, std::size_t embedding_dim) : seed_(seed), dim_(embedding_dim) {}

void MockBackend::add_rule(std::string needle, std::string response, std::optional<int> sample) {
  std::lock_guard<std::mutex> lock(rules_mu_);
  rules_.push_back(Rule{std::move(needle), std::move(response), sample});
}

std::string MockBackend::complete(const ChatRequest& req) {
  chat_calls_.fetch_add(1);
  {
    std::lock_guard<std::mutex> lock(rules_mu_);
    for (const auto& rule : rules_) {
      if (rule.sample && *rule.sample != req.sample) continue;
      if (req.user_prompt.find(rule.needle) != std::string::npos) return rule.response;
    }
  }
  const std::string& p = req.user_prompt;
  Rng rng(text::fnv1a64(p, seed_) ^ (static_cast<std::uint64_t>(req.sample) * 0xd1b54a32d192ed03ULL));

  if (p.rfind("You are a quiz generator.", 0) == 0) return quiz_reply(p, rng);
  if (p.rfind("You are a concept extraction assistant", 0) == 0) return concepts_reply(p);
  if (p.rfind("You are a summarization assistant", 0) == 0) return summary_reply(p, req.max_output_tokens);
  if (p.find("You are given two quiz sets") != std::string::npos) return pairwise_reply(p);
  if (p.find("evaluate the educational quality of the quiz set") != std::string::npos) return judge_reply(p, rng);
  if (p.rfind("You are an education expert assessing student questions", 0) == 0) return difficulty_reply(p);
  if (p.rfind("You are helping build a dataset of student questions", 0) == 0) return dataset_reply(p, rng);
  return "Mock response " + std::to_string(rng.next() % 100000) + ".";
}

std::vector<double> MockBackend::embed_one(const std::string& input) const {
  std::vector<std::string> tokens;
  for (auto& t : text::content_tokens(input))
    if (!text::is_stopword(t)) tokens.push_back(std::move(t));
  if (tokens.empty()) tokens = text::content_tokens(input);
  if (tokens.empty()) tokens.push_back(input);

  std::vector<double> v(dim_, 0.0);
  for (const auto& tok : tokens) {
    std::uint64_t state = text::fnv1a64(tok, seed_);
    for (std::size_t i = 0; i < dim_; ++i) {
      double u = static_cast<double>(text::splitmix64(state) >> 11) * (1.0 / 9007199254740992.0);
      v[i] += 2.0 * u - 1.0;
    }
  }
  double norm = 0.0;
  for (double x : v) norm += x * x;
  norm = std::sqrt(norm);
  if (norm == 0.0) {
    v[0] = 1.0;
    return v;
  }
  for (double& x : v) x /= norm;
  return v;
}

std::vector<std::vector<double>> MockBackend::embed(const std::vector<std::string>& texts, const std::string&) {
  embed_calls_.fetch_add(1);
  std::vector<std::vector<double>> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(embed_one(t));
  return out;
}

}  // namespace conquer::llm
