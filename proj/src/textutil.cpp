#include "memqa/textutil.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdio>
#include <regex>
#include <set>
#include <sstream>

namespace memqa::text {

std::string to_lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string collapse_whitespace(const std::string& s) {
  std::string out;
  bool in_space = false;
  for (unsigned char c : s) {
    if (std::isspace(c)) {
      in_space = true;
    } else {
      if (in_space && !out.empty()) out.push_back(' ');
      in_space = false;
      out.push_back(static_cast<char>(c));
    }
  }
  return out;
}

std::vector<std::string> tokenize(const std::string& s) {
  std::vector<std::string> tokens;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) {
      tokens.push_back(to_lower(cur));
      cur.clear();
    }
  };
  for (std::size_t i = 0; i < s.size(); ++i) {
    unsigned char c = s[i];
    if (std::isalnum(c)) {
      cur.push_back(static_cast<char>(c));
    } else if ((c == '.' || c == ',') && !cur.empty() && std::isdigit(static_cast<unsigned char>(cur.back())) &&
               i + 1 < s.size() && std::isdigit(static_cast<unsigned char>(s[i + 1]))) {
      cur.push_back(static_cast<char>(c));
    } else {
      flush();
    }
  }
  flush();
  return tokens;
}

bool is_stopword(const std::string& token) {
  static const std::set<std::string> kStop = {
      "a",      "an",     "the",    "i",       "my",      "me",     "we",
      "our",    "did",    "do",     "does",    "was",     "were",   "is",
      "are",    "be",     "been",   "at",      "in",      "on",     "of",
      "to",     "for",    "with",   "and",     "or",      "that",   "this",
      "it",     "its",    "there",  "where",   "when",    "what",   "which",
      "who",    "how",    "much",   "many",    "remember","recall", "exactly",
      "finally","pay",    "paid",   "have",    "had",     "has",    "go",
      "went",   "take",   "took",   "taking",  "photo",   "photos", "video",
      "videos", "email",  "emails", "list",    "item",    "items",  "during",
      "trip",   "recent", "recently","nice",   "very",    "today",  "again",
      "happen", "happened","place", "from",    "about",   "one",    "all",
      // schema field labels: render artifacts, not content
      "id",     "time",   "location","source",  "entities","tags",   "ocr",
      "summary","body"};
  return kStop.count(token) > 0;
}

namespace {

// month names and ordinal day forms count as date material
bool is_dateish(const std::string& token) {
  static const std::regex kDateish(
      R"((?:jan|feb|mar|apr|may|jun|jul|aug|sep|oct|nov|dec)[a-z]*|\d{1,4}(?:st|nd|rd|th)?|\d{4}-\d{2}-\d{2})",
      std::regex::icase);
  return std::regex_match(token, kDateish);
}

}  // namespace

std::vector<std::string> distinctive_tokens(const std::string& question) {
  std::set<std::string> date_tokens;
  for (const auto& d : extract_dates(question)) {
    for (const auto& t : tokenize(d)) date_tokens.insert(t);
  }
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& t : tokenize(question)) {
    if (is_stopword(t) || date_tokens.count(t)) continue;
    if (is_dateish(t)) continue;
    if (seen.insert(t).second) out.push_back(t);
  }
  return out;
}

std::vector<std::string> embedding_tokens(const std::string& s) {
  // like tokenize, but hyphenated identifiers ("REF-12", record ids) stay
  // whole so they act as distinctive content markers
  std::vector<std::string> raw;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) {
      raw.push_back(to_lower(cur));
      cur.clear();
    }
  };
  for (std::size_t i = 0; i < s.size(); ++i) {
    unsigned char c = s[i];
    if (std::isalnum(c)) {
      cur.push_back(static_cast<char>(c));
    } else if ((c == '.' || c == ',' || c == '-') && !cur.empty() &&
               std::isalnum(static_cast<unsigned char>(cur.back())) &&
               i + 1 < s.size() && std::isalnum(static_cast<unsigned char>(s[i + 1]))) {
      cur.push_back(static_cast<char>(c));
    } else {
      flush();
    }
  }
  flush();

  std::vector<std::string> out;
  for (const auto& t : raw) {
    if (is_stopword(t) || is_dateish(t)) continue;
    out.push_back(t);
  }
  // canonical dates carry the temporal signal in one comparable form
  for (const auto& d : extract_dates(s)) out.push_back(d);
  return out;
}

namespace {

int month_from_name(std::string name) {
  name = to_lower(name).substr(0, 3);
  static const std::array<const char*, 12> kNames = {
      "jan", "feb", "mar", "apr", "may", "jun",
      "jul", "aug", "sep", "oct", "nov", "dec"};
  for (int i = 0; i < 12; ++i) {
    if (name == kNames[i]) return i + 1;
  }
  return 0;
}

std::string format_date(int y, int m, int d) {
  if (m < 1 || m > 12 || d < 1 || d > 31) return "";
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", y, m, d);
  return buf;
}

}  // namespace

std::vector<std::string> extract_dates(const std::string& s) {
  std::vector<std::string> out;
  auto push = [&](const std::string& d) {
    if (!d.empty()) out.push_back(d);
  };

  static const std::regex kIso(R"((\d{4})-(\d{2})-(\d{2}))");
  static const std::regex kDayMonthYear(
      R"((\d{1,2})(?:st|nd|rd|th)?\s+([A-Za-z]{3,9})\.?,?\s+(\d{4}))");
  static const std::regex kMonthDayYear(
      R"(([A-Za-z]{3,9})\.?\s+(\d{1,2})(?:st|nd|rd|th)?\s*,?\s+(\d{4}))");

  for (auto it = std::sregex_iterator(s.begin(), s.end(), kIso);
       it != std::sregex_iterator(); ++it) {
    push(format_date(std::stoi((*it)[1]), std::stoi((*it)[2]), std::stoi((*it)[3])));
  }
  for (auto it = std::sregex_iterator(s.begin(), s.end(), kDayMonthYear);
       it != std::sregex_iterator(); ++it) {
    int m = month_from_name((*it)[2]);
    if (m) push(format_date(std::stoi((*it)[3]), m, std::stoi((*it)[1])));
  }
  for (auto it = std::sregex_iterator(s.begin(), s.end(), kMonthDayYear);
       it != std::sregex_iterator(); ++it) {
    int m = month_from_name((*it)[1]);
    if (m) push(format_date(std::stoi((*it)[3]), m, std::stoi((*it)[2])));
  }
  return out;
}

std::string canonicalize_dates(const std::string& s) {
  static const std::regex kDayMonthYear(
      R"((\d{1,2})(?:st|nd|rd|th)?\s+([A-Za-z]{3,9})\.?,?\s+(\d{4}))");
  static const std::regex kMonthDayYear(
      R"(([A-Za-z]{3,9})\.?\s+(\d{1,2})(?:st|nd|rd|th)?\s*,?\s+(\d{4}))");

  auto rewrite = [](const std::string& in, const std::regex& re, int month_group,
                    int day_group, int year_group) {
    std::string out;
    auto begin = std::sregex_iterator(in.begin(), in.end(), re);
    std::size_t last = 0;
    for (auto it = begin; it != std::sregex_iterator(); ++it) {
      const auto& m = *it;
      const int month = month_from_name(m[month_group]);
      const std::string canon =
          month ? format_date(std::stoi(m[year_group]), month,
                              std::stoi(m[day_group]))
                : "";
      out += in.substr(last, m.position() - last);
      out += canon.empty() ? m.str() : canon;
      last = m.position() + m.length();
    }
    out += in.substr(last);
    return out;
  };
  return rewrite(rewrite(s, kDayMonthYear, 2, 1, 3), kMonthDayYear, 1, 2, 3);
}

std::optional<std::string> first_date(const std::string& s) {
  auto dates = extract_dates(s);
  if (dates.empty()) return std::nullopt;
  return dates.front();
}

std::vector<std::string> extract_amounts(const std::string& s) {
  static const std::regex kAmount(R"((\d{1,3}(?:,\d{3})*|\d+)\.(\d{2})\b)");
  std::vector<std::string> out;
  for (auto it = std::sregex_iterator(s.begin(), s.end(), kAmount);
       it != std::sregex_iterator(); ++it) {
    std::string whole = (*it)[1];
    whole.erase(std::remove(whole.begin(), whole.end(), ','), whole.end());
    out.push_back(whole + "." + std::string((*it)[2]));
  }
  return out;
}

std::string leading_sentences(const std::string& body, int n) {
  std::string out;
  int count = 0;
  for (char c : body) {
    out.push_back(c);
    if (c == '.' || c == '!' || c == '?') {
      if (++count >= n) break;
    }
  }
  return trim(out);
}

bool contains_ci(const std::string& haystack, const std::string& needle) {
  return to_lower(haystack).find(to_lower(needle)) != std::string::npos;
}

}  // namespace memqa::text
