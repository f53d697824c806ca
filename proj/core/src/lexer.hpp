#ifndef MASHUP_SRC_LEXER_HPP
#define MASHUP_SRC_LEXER_HPP

#include "mashup/diagnostic.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace mashup::detail {

enum class TokKind { Ident, Int, String, Punct, End };

struct Token {
    TokKind kind = TokKind::End;
    std::string text;
    std::int64_t int_value = 0;
    SourcePos pos;
};

/// Shared tokenizer for every textual unit format. Comments: `//`, `/* */`
/// and `#` to end of line.
std::vector<Token> tokenize(std::string_view text, const std::string& unit);

} // namespace mashup::detail

#endif // MASHUP_SRC_LEXER_HPP
