#include "crewline/textutil.hpp"

#include <cctype>

namespace crewline::text {

char32_t decode_utf8(std::string_view s, std::size_t& pos) {
    auto byte = [&](std::size_t i) -> unsigned char {
        return static_cast<unsigned char>(s[i]);
    };
    unsigned char b0 = byte(pos);
    if (b0 < 0x80) {
        pos += 1;
        return b0;
    }
    auto cont = [&](std::size_t i) {
        return i < s.size() && (byte(i) & 0xC0) == 0x80;
    };
    if ((b0 & 0xE0) == 0xC0 && cont(pos + 1)) {
        char32_t cp = (char32_t(b0 & 0x1F) << 6) | (byte(pos + 1) & 0x3F);
        pos += 2;
        return cp;
    }
    if ((b0 & 0xF0) == 0xE0 && cont(pos + 1) && cont(pos + 2)) {
        char32_t cp = (char32_t(b0 & 0x0F) << 12) | (char32_t(byte(pos + 1) & 0x3F) << 6) |
                      (byte(pos + 2) & 0x3F);
        pos += 3;
        return cp;
    }
    if ((b0 & 0xF8) == 0xF0 && cont(pos + 1) && cont(pos + 2) && cont(pos + 3)) {
        char32_t cp = (char32_t(b0 & 0x07) << 18) | (char32_t(byte(pos + 1) & 0x3F) << 12) |
                      (char32_t(byte(pos + 2) & 0x3F) << 6) | (byte(pos + 3) & 0x3F);
        pos += 4;
        return cp;
    }
    pos += 1;
    return 0xFFFD;
}

std::string fold_to_ascii(char32_t cp) {
    if (cp < 0x80) {
        return std::string(1, static_cast<char>(cp));
    }
    // Latin-1 supplement.
    switch (cp) {
        case U'À': case U'Á': case U'Â': case U'Ã': case U'Ä': case U'Å':
        case U'à': case U'á': case U'â': case U'ã': case U'ä': case U'å':
            return "a";
        case U'Æ': case U'æ': return "ae";
        case U'Ç': case U'ç': return "c";
        case U'È': case U'É': case U'Ê': case U'Ë':
        case U'è': case U'é': case U'ê': case U'ë':
            return "e";
        case U'Ì': case U'Í': case U'Î': case U'Ï':
        case U'ì': case U'í': case U'î': case U'ï':
            return "i";
        case U'Ð': case U'ð': return "d";
        case U'Ñ': case U'ñ': return "n";
        case U'Ò': case U'Ó': case U'Ô': case U'Õ': case U'Ö': case U'Ø':
        case U'ò': case U'ó': case U'ô': case U'õ': case U'ö': case U'ø':
            return "o";
        case U'Ù': case U'Ú': case U'Û': case U'Ü':
        case U'ù': case U'ú': case U'û': case U'ü':
            return "u";
        case U'Ý': case U'ý': case U'ÿ': case U'Ÿ': return "y";
        case U'ß': return "ss";
        case U'Œ': case U'œ': return "oe";
        case U'Š': case U'š': return "s";
        case U'Ž': case U'ž': return "z";
        default: break;
    }
    // Latin Extended-A: map by range to the base letter.
    struct Range { char32_t lo, hi; char base; };
    static const Range kRanges[] = {
        {0x0100, 0x0105, 'a'}, {0x0106, 0x010D, 'c'}, {0x010E, 0x0111, 'd'},
        {0x0112, 0x011B, 'e'}, {0x011C, 0x0123, 'g'}, {0x0124, 0x0127, 'h'},
        {0x0128, 0x0131, 'i'}, {0x0134, 0x0135, 'j'}, {0x0136, 0x0138, 'k'},
        {0x0139, 0x0142, 'l'}, {0x0143, 0x0149, 'n'}, {0x014C, 0x0151, 'o'},
        {0x0154, 0x0159, 'r'}, {0x015A, 0x0161, 's'}, {0x0162, 0x0167, 't'},
        {0x0168, 0x0173, 'u'}, {0x0174, 0x0175, 'w'}, {0x0176, 0x0178, 'y'},
        {0x0179, 0x017E, 'z'},
    };
    for (const auto& r : kRanges) {
        if (cp >= r.lo && cp <= r.hi) {
            return std::string(1, r.base);
        }
    }
    return "";
}

std::string fold_lower(std::string_view s, bool drop_unmapped) {
    std::string out;
    out.reserve(s.size());
    std::size_t pos = 0;
    while (pos < s.size()) {
        std::size_t start = pos;
        char32_t cp = decode_utf8(s, pos);
        std::string folded = fold_to_ascii(cp);
        if (!folded.empty()) {
            for (char c : folded) {
                out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
            }
        } else if (!drop_unmapped) {
            out.append(s.substr(start, pos - start));
        }
    }
    return out;
}

std::string to_upper_ascii(std::string_view s) {
    std::string out(s);
    for (char& c : out) {
        c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    }
    return out;
}

std::string trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

std::string collapse_ws(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    bool in_ws = true;  // leading whitespace drops
    for (char c : s) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            if (!in_ws) {
                out.push_back(' ');
                in_ws = true;
            }
        } else {
            out.push_back(c);
            in_ws = false;
        }
    }
    if (!out.empty() && out.back() == ' ') {
        out.pop_back();
    }
    return out;
}

bool is_ascii_alnum(char32_t cp) {
    return (cp >= '0' && cp <= '9') || (cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z');
}

std::vector<std::string> split_lines(std::string_view s) {
    std::vector<std::string> lines;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= s.size(); ++i) {
        if (i == s.size() || s[i] == '\n') {
            std::string_view line = s.substr(start, i - start);
            if (!line.empty() && line.back() == '\r') {
                line.remove_suffix(1);
            }
            lines.emplace_back(line);
            start = i + 1;
        }
    }
    if (!lines.empty() && lines.back().empty() && !s.empty() && s.back() == '\n') {
        lines.pop_back();
    }
    return lines;
}

}  // namespace crewline::text
