#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace cbcomm::text {

std::string trim(std::string_view s);
std::string to_lower(std::string_view s);

// Collapse every run of whitespace to a single space and trim the ends.
std::string collapse_whitespace(std::string_view s);

std::vector<std::string> split_whitespace(std::string_view s);
std::size_t count_words(std::string_view s);

// Lowercased word tokens: maximal runs of letters/digits/underscore, with
// bytes >= 0x80 treated as word characters so UTF-8 words stay intact.
std::vector<std::string> word_tokens(std::string_view s, std::size_t min_length = 1);

bool is_word_byte(unsigned char c);

}  // namespace cbcomm::text
