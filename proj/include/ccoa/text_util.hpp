#pragma once

#include <string>
#include <vector>

namespace ccoa {

/// Raw whitespace split; tokens keep their case and punctuation.
std::vector<std::string> whitespace_tokens(const std::string& text);

/// Lowercases ASCII letters and removes ASCII punctuation from one token.
/// Non-ASCII bytes pass through untouched.
std::string fold_token(const std::string& token);

/// Whitespace tokens folded by fold_token(); tokens that fold to nothing
/// are dropped.
std::vector<std::string> content_tokens(const std::string& text);

/// First `n` sentences of `text`, splitting after runs of '.', '!' or '?'.
/// Text without terminators counts as a single sentence.
std::string first_sentences(const std::string& text, std::size_t n);

} // namespace ccoa
