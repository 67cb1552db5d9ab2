#include "ioforge/tokenize.hpp"

#include <cstdio>

namespace ioforge {

namespace {

void append_utf8(std::string& out, char32_t cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

bool is_ascii_alnum(char32_t cp) {
    return (cp >= '0' && cp <= '9') || (cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z');
}

bool is_word_cp(char32_t cp) {
    if (cp < 0x80) return is_ascii_alnum(cp) || cp == '_';
    if (is_emoji_cp(cp)) return false;
    if (cp >= 0x2000 && cp <= 0x206F) return false;  // general punctuation block
    if (cp == 0xA0 || cp == 0xFFFD || cp == 0xFE0F || cp == 0x200D) return false;
    return true;
}

bool is_space_cp(char32_t cp) {
    return cp <= 0x20 || cp == 0xA0 || (cp >= 0x2000 && cp <= 0x200A) || cp == 0x2028 ||
           cp == 0x2029 || cp == 0x3000;
}

char32_t ascii_lower(char32_t cp) {
    return (cp >= 'A' && cp <= 'Z') ? cp + 32 : cp;
}

bool is_regional_indicator(char32_t cp) {
    return cp >= 0x1F1E6 && cp <= 0x1F1FF;
}

// Flag-pair country names for common 2-letter codes; fallback "flag_xx".
std::string country_name(char a, char b) {
    const char code[3] = {a, b, '\0'};
    struct Entry {
        const char* code;
        const char* name;
    };
    static const Entry table[] = {
        {"us", "united_states"}, {"gb", "united_kingdom"}, {"fr", "france"},
        {"de", "germany"},       {"ru", "russia"},         {"cn", "china"},
        {"it", "italy"},         {"es", "spain"},          {"ca", "canada"},
        {"au", "australia"},     {"jp", "japan"},          {"br", "brazil"},
        {"in", "india"},         {"mx", "mexico"},         {"tr", "turkey"},
        {"sa", "saudi_arabia"},  {"ua", "ukraine"},        {"pl", "poland"},
        {"nl", "netherlands"},   {"se", "sweden"},         {"eu", "european_union"},
        {"ch", "switzerland"},   {"ie", "ireland"},        {"rs", "serbia"},
    };
    for (const auto& e : table) {
        if (e.code[0] == code[0] && e.code[1] == code[1]) return e.name;
    }
    return std::string("flag_") + code;
}

const char* emoji_name(char32_t cp) {
    switch (cp) {
        case 0x1F600: return "grinning";
        case 0x1F601: return "grin";
        case 0x1F602: return "joy";
        case 0x1F603: return "smiley";
        case 0x1F604: return "smile";
        case 0x1F605: return "sweat_smile";
        case 0x1F606: return "laughing";
        case 0x1F609: return "wink";
        case 0x1F60A: return "blush";
        case 0x1F60D: return "heart_eyes";
        case 0x1F60E: return "sunglasses";
        case 0x1F610: return "neutral_face";
        case 0x1F612: return "unamused";
        case 0x1F614: return "pensive";
        case 0x1F618: return "kissing_heart";
        case 0x1F621: return "rage";
        case 0x1F622: return "cry";
        case 0x1F629: return "weary";
        case 0x1F62D: return "sob";
        case 0x1F631: return "scream";
        case 0x1F633: return "flushed";
        case 0x1F637: return "mask";
        case 0x1F644: return "rolling_eyes";
        case 0x1F64F: return "pray";
        case 0x1F680: return "rocket";
        case 0x1F4A5: return "boom";
        case 0x1F4AA: return "muscle";
        case 0x1F4AF: return "100";
        case 0x1F4B0: return "moneybag";
        case 0x1F525: return "fire";
        case 0x1F389: return "tada";
        case 0x1F3C6: return "trophy";
        case 0x1F440: return "eyes";
        case 0x1F44A: return "punch";
        case 0x1F44D: return "thumbsup";
        case 0x1F44E: return "thumbsdown";
        case 0x1F44F: return "clap";
        case 0x1F494: return "broken_heart";
        case 0x1F4A9: return "poop";
        case 0x1F914: return "thinking";
        case 0x1F923: return "rofl";
        case 0x1F926: return "facepalm";
        case 0x1F937: return "shrug";
        case 0x2705: return "white_check_mark";
        case 0x2708: return "airplane";
        case 0x2714: return "heavy_check_mark";
        case 0x274C: return "x";
        case 0x2757: return "exclamation";
        case 0x2764: return "heart";
        case 0x26A0: return "warning";
        case 0x26BD: return "soccer";
        case 0x2B50: return "star";
        default: return nullptr;
    }
}

}  // namespace

std::vector<char32_t> decode_utf8(const std::string& s) {
    std::vector<char32_t> out;
    out.reserve(s.size());
    std::size_t i = 0;
    const std::size_t n = s.size();
    while (i < n) {
        const unsigned char b0 = static_cast<unsigned char>(s[i]);
        char32_t cp = 0xFFFD;
        std::size_t len = 1;
        if (b0 < 0x80) {
            cp = b0;
        } else if ((b0 & 0xE0) == 0xC0) {
            len = 2;
            cp = b0 & 0x1F;
        } else if ((b0 & 0xF0) == 0xE0) {
            len = 3;
            cp = b0 & 0x0F;
        } else if ((b0 & 0xF8) == 0xF0) {
            len = 4;
            cp = b0 & 0x07;
        } else {
            out.push_back(0xFFFD);
            ++i;
            continue;
        }
        if (len > 1) {
            if (i + len > n) {
                out.push_back(0xFFFD);
                ++i;
                continue;
            }
            bool ok = true;
            for (std::size_t k = 1; k < len; ++k) {
                const unsigned char bk = static_cast<unsigned char>(s[i + k]);
                if ((bk & 0xC0) != 0x80) {
                    ok = false;
                    break;
                }
                cp = (cp << 6) | (bk & 0x3F);
            }
            if (!ok) {
                out.push_back(0xFFFD);
                ++i;
                continue;
            }
        }
        out.push_back(cp);
        i += len;
    }
    return out;
}

std::size_t utf8_length(const std::string& s) {
    std::size_t count = 0;
    for (char c : s) {
        if ((static_cast<unsigned char>(c) & 0xC0) != 0x80) ++count;
    }
    return count;
}

bool is_emoji_cp(char32_t cp) {
    if (cp >= 0x1F000 && cp <= 0x1FAFF) return true;  // pictographs, emoticons, flags
    if (cp >= 0x2600 && cp <= 0x27BF) return true;    // misc symbols, dingbats
    if (cp >= 0x2B00 && cp <= 0x2BFF) return true;    // misc symbols and arrows (stars)
    return false;
}

std::string emoji_token(char32_t cp) {
    if (const char* name = emoji_name(cp)) {
        return std::string(":") + name + ":";
    }
    char buf[16];
    std::snprintf(buf, sizeof(buf), ":u%04x:", static_cast<unsigned>(cp));
    return buf;
}

std::vector<std::string> tokenize(const std::string& text) {
    const std::vector<char32_t> cps = decode_utf8(text);
    std::vector<std::string> tokens;
    const std::size_t n = cps.size();
    std::size_t i = 0;

    // A leading "RT @user:" is a retweet marker, not content.
    if (n >= 4 && ascii_lower(cps[0]) == 'r' && ascii_lower(cps[1]) == 't' &&
        is_space_cp(cps[2]) && cps[3] == '@') {
        i = 2;
    }

    auto matches_scheme = [&](std::size_t pos, std::size_t& host_start) {
        static const char32_t http[] = {'h', 't', 't', 'p'};
        for (std::size_t k = 0; k < 4; ++k) {
            if (pos + k >= n || ascii_lower(cps[pos + k]) != http[k]) return false;
        }
        std::size_t p = pos + 4;
        if (p < n && ascii_lower(cps[p]) == 's') ++p;
        if (p + 2 < n && cps[p] == ':' && cps[p + 1] == '/' && cps[p + 2] == '/') {
            host_start = p + 3;
            return true;
        }
        return false;
    };

    while (i < n) {
        const char32_t cp = cps[i];
        if (cp == 0xFE0F || cp == 0x200D) {  // variation selector / ZWJ
            ++i;
            continue;
        }
        std::size_t host_start = 0;
        if (matches_scheme(i, host_start)) {
            std::string host;
            std::size_t j = host_start;
            while (j < n && !is_space_cp(cps[j]) && cps[j] != '/' && cps[j] != '?' &&
                   cps[j] != '#' && cps[j] != ':') {
                append_utf8(host, ascii_lower(cps[j]));
                ++j;
            }
            while (j < n && !is_space_cp(cps[j])) ++j;  // rest of the URL
            if (host.rfind("www.", 0) == 0) host.erase(0, 4);
            if (utf8_length(host) >= 2) tokens.push_back(host);
            i = j;
            continue;
        }
        if (cp == '@' && i + 1 < n && is_word_cp(cps[i + 1])) {
            ++i;
            while (i < n && is_word_cp(cps[i])) ++i;
            continue;
        }
        if (cp == '#') {
            ++i;  // the tag word itself is kept
            continue;
        }
        if (is_regional_indicator(cp)) {
            if (i + 1 < n && is_regional_indicator(cps[i + 1])) {
                const char a = static_cast<char>('a' + (cp - 0x1F1E6));
                const char b = static_cast<char>('a' + (cps[i + 1] - 0x1F1E6));
                tokens.push_back(":" + country_name(a, b) + ":");
                i += 2;
            } else {
                tokens.push_back(emoji_token(cp));
                ++i;
            }
            continue;
        }
        if (is_emoji_cp(cp)) {
            tokens.push_back(emoji_token(cp));
            ++i;
            continue;
        }
        if (is_word_cp(cp)) {
            std::string word;
            std::size_t count = 0;
            while (i < n && is_word_cp(cps[i])) {
                append_utf8(word, ascii_lower(cps[i]));
                ++count;
                ++i;
            }
            if (count >= 2) tokens.push_back(word);
            continue;
        }
        ++i;  // punctuation, whitespace, apostrophes: token boundary
    }
    return tokens;
}

}  // namespace ioforge
