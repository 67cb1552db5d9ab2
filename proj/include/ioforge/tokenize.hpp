#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace ioforge {

// Decodes a UTF-8 string into codepoints; invalid bytes decode as U+FFFD.
std::vector<char32_t> decode_utf8(const std::string& s);

// Number of codepoints in a UTF-8 string.
std::size_t utf8_length(const std::string& s);

// True if the codepoint renders as an emoji (pictograph, dingbat, regional
// indicator, ...), as opposed to a letter that can appear inside a word.
bool is_emoji_cp(char32_t cp);

// Canonical ":name:" token for a single emoji codepoint.
std::string emoji_token(char32_t cp);

// Tokenizes tweet text into lowercase tokens:
//  - URLs become their host with any leading "www." removed
//  - "#tag" keeps the tag word, "@mention" is dropped entirely
//  - a leading retweet marker "RT @user:" contributes no tokens
//  - emoji become ":name:" tokens (flag pairs map to country names)
//  - apostrophes split words; tokens shorter than 2 codepoints are dropped
//    unless they are emoji tokens
std::vector<std::string> tokenize(const std::string& text);

}  // namespace ioforge
