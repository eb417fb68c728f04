#include "ccoa/text_util.hpp"

#include <cctype>

namespace ccoa {

std::vector<std::string> whitespace_tokens(const std::string& text) {
    std::vector<std::string> tokens;
    std::size_t i = 0;
    const std::size_t n = text.size();
    while (i < n) {
        while (i < n && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        std::size_t start = i;
        while (i < n && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        if (i > start) tokens.emplace_back(text, start, i - start);
    }
    return tokens;
}

std::string fold_token(const std::string& token) {
    std::string out;
    out.reserve(token.size());
    for (char ch : token) {
        const auto uc = static_cast<unsigned char>(ch);
        if (uc < 0x80) {
            if (std::ispunct(uc)) continue;
            out.push_back(static_cast<char>(std::tolower(uc)));
        } else {
            out.push_back(ch);
        }
    }
    return out;
}

std::vector<std::string> content_tokens(const std::string& text) {
    std::vector<std::string> out;
    for (const auto& raw : whitespace_tokens(text)) {
        std::string folded = fold_token(raw);
        if (!folded.empty()) out.push_back(std::move(folded));
    }
    return out;
}

std::string first_sentences(const std::string& text, std::size_t n) {
    if (n == 0 || text.empty()) return "";
    std::size_t taken = 0;
    std::size_t i = 0;
    const std::size_t len = text.size();
    while (i < len && taken < n) {
        while (i < len && text[i] != '.' && text[i] != '!' && text[i] != '?') ++i;
        while (i < len && (text[i] == '.' || text[i] == '!' || text[i] == '?')) ++i;
        ++taken;
    }
    std::string out = text.substr(0, i);
    while (!out.empty() && std::isspace(static_cast<unsigned char>(out.back()))) out.pop_back();
    return out;
}

} // namespace ccoa
