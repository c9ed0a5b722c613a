#include "retsyn/utf8.hpp"

namespace retsyn {

namespace {

inline bool is_cont(unsigned char b) { return (b & 0xC0) == 0x80; }

}  // namespace

std::size_t cp_size_at(std::string_view text, std::size_t pos) {
    if (pos >= text.size()) return 0;
    unsigned char b0 = static_cast<unsigned char>(text[pos]);
    std::size_t want = 1;
    if (b0 < 0x80) {
        return 1;
    } else if ((b0 & 0xE0) == 0xC0) {
        want = 2;
    } else if ((b0 & 0xF0) == 0xE0) {
        want = 3;
    } else if ((b0 & 0xF8) == 0xF0) {
        want = 4;
    } else {
        return 1;  // stray continuation or invalid lead
    }
    if (pos + want > text.size()) return 1;
    for (std::size_t i = 1; i < want; ++i) {
        if (!is_cont(static_cast<unsigned char>(text[pos + i]))) return 1;
    }
    return want;
}

std::vector<std::size_t> cp_offsets(std::string_view text) {
    std::vector<std::size_t> offs;
    offs.reserve(text.size() / 2 + 1);
    std::size_t pos = 0;
    while (pos < text.size()) {
        offs.push_back(pos);
        pos += cp_size_at(text, pos);
    }
    offs.push_back(text.size());
    return offs;
}

std::size_t cp_len(std::string_view text) {
    std::size_t n = 0, pos = 0;
    while (pos < text.size()) {
        pos += cp_size_at(text, pos);
        ++n;
    }
    return n;
}

char32_t cp_at(std::string_view text, std::size_t pos) {
    std::size_t size = cp_size_at(text, pos);
    unsigned char b0 = static_cast<unsigned char>(text[pos]);
    if (size == 1) {
        return static_cast<char32_t>(b0);
    }
    char32_t cp = 0;
    switch (size) {
        case 2: cp = b0 & 0x1F; break;
        case 3: cp = b0 & 0x0F; break;
        default: cp = b0 & 0x07; break;
    }
    for (std::size_t i = 1; i < size; ++i) {
        cp = (cp << 6) | (static_cast<unsigned char>(text[pos + i]) & 0x3F);
    }
    return cp;
}

std::u32string decode_utf8(std::string_view text) {
    std::u32string out;
    out.reserve(text.size() / 2 + 1);
    std::size_t pos = 0;
    while (pos < text.size()) {
        out.push_back(cp_at(text, pos));
        pos += cp_size_at(text, pos);
    }
    return out;
}

std::string encode_utf8(char32_t cp) {
    std::string out;
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
    return out;
}

std::string encode_utf8(std::u32string_view text) {
    std::string out;
    out.reserve(text.size() * 3);
    for (char32_t cp : text) out += encode_utf8(cp);
    return out;
}

std::string_view cp_prefix(std::string_view text, std::size_t n) {
    std::size_t pos = 0, seen = 0;
    while (pos < text.size() && seen < n) {
        pos += cp_size_at(text, pos);
        ++seen;
    }
    return text.substr(0, pos);
}

bool is_cjk(char32_t cp) {
    return (cp >= 0x4E00 && cp <= 0x9FFF) ||   // CJK Unified Ideographs
           (cp >= 0x3400 && cp <= 0x4DBF) ||   // Extension A
           (cp >= 0xF900 && cp <= 0xFAFF);     // Compatibility Ideographs
}

std::size_t count_cjk(std::string_view text) {
    std::size_t n = 0, pos = 0;
    while (pos < text.size()) {
        if (is_cjk(cp_at(text, pos))) ++n;
        pos += cp_size_at(text, pos);
    }
    return n;
}

bool is_space_cp(char32_t cp) {
    return cp == U' ' || cp == U'\t' || cp == U'\n' || cp == U'\r' ||
           cp == U'\f' || cp == U'\v' || cp == 0x3000;  // ideographic space
}

}  // namespace retsyn
