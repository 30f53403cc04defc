#pragma once

#include <set>
#include <string>
#include <string_view>

namespace clawtrace {

// Levenshtein edit distance over bytes.
size_t levenshtein(std::string_view a, std::string_view b);

// 1 - lev(a,b) / max(|a|,|b|); 1.0 when both strings are empty.
// Symmetric, bounded to [0,1], equals 1 iff a == b.
double normalized_similarity(std::string_view a, std::string_view b);

// Lowercases, splits on non-alphanumeric runs, drops tokens shorter than
// two characters. Used for the sub-agent output overlap measure.
std::set<std::string> overlap_tokens(std::string_view text);

// |a ∩ b| / |a ∪ b|; 1.0 when both sets are empty.
double jaccard(const std::set<std::string>& a, const std::set<std::string>& b);

// Jaccard overlap of the two texts' token sets.
double jaccard_text(std::string_view a, std::string_view b);

}  // namespace clawtrace
