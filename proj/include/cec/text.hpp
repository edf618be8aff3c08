#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace cec::text {

std::string_view trim(std::string_view s);

/// Trim, collapse internal whitespace runs to one space, strip one or more
/// layers of surrounding quotes (ASCII and typographic). Used wherever
/// intermediate texts are compared for identity.
std::string normalize(std::string_view s);

std::string to_lower(std::string_view s);

bool starts_with_ci(std::string_view s, std::string_view prefix);

/// Splits on '\n', dropping a trailing '\r' from each line.
std::vector<std::string_view> split_lines(std::string_view s);

std::vector<std::string_view> split_words(std::string_view s);

std::size_t word_count(std::string_view s);

}  // namespace cec::text
