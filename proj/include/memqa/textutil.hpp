#pragma once

#include <optional>
#include <string>
#include <vector>

namespace memqa::text {

std::string to_lower(std::string s);
std::string trim(const std::string& s);
std::string collapse_whitespace(const std::string& s);

/// Lowercase alphanumeric tokens. A '.' or ',' between digits stays inside
/// the token so that decimal and grouped numbers survive as single tokens.
std::vector<std::string> tokenize(const std::string& s);

bool is_stopword(const std::string& token);

/// Non-stopword, non-date tokens of a question, in order, deduplicated.
std::vector<std::string> distinctive_tokens(const std::string& question);

/// Content tokens for the mock embedder: hyphenated identifiers kept whole,
/// stopwords and loose date words dropped, canonical "YYYY-MM-DD" dates
/// appended so temporal phrasing embeds uniformly.
std::vector<std::string> embedding_tokens(const std::string& s);

/// Recognized date formats, canonicalized to "YYYY-MM-DD":
///   2023-12-14 / 2023-12-14T09:30Z / "14 December 2023" /
///   "December 14, 2023" / "Dec 14th, 2023" / "14 Dec 2023"
std::vector<std::string> extract_dates(const std::string& s);
std::optional<std::string> first_date(const std::string& s);

/// Rewrites every textual date (same format table as extract_dates) to its
/// "YYYY-MM-DD" form in place; everything else passes through untouched.
std::string canonicalize_dates(const std::string& s);

/// Currency-style amounts with two decimals, e.g. "1,234.56" -> "1234.56".
std::vector<std::string> extract_amounts(const std::string& s);

/// First n sentences of a text, split on '.', '!' and '?'.
std::string leading_sentences(const std::string& body, int n);

bool contains_ci(const std::string& haystack, const std::string& needle);

}  // namespace memqa::text
