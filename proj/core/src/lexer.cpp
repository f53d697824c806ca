#include "lexer.hpp"

#include <array>
#include <cctype>

namespace mashup::detail {

namespace {

constexpr std::array<std::string_view, 7> kTwoCharPunct = {":=", "==", "!=", "<=", ">=", "..", "->"};
constexpr std::string_view kOneCharPunct = "{}()[]<>=+-*/,;:.|@!";

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

} // namespace

std::vector<Token> tokenize(std::string_view text, const std::string& unit)
{
    std::vector<Token> out;
    std::size_t i = 0;
    int line = 1;
    int col = 1;

    auto fail = [&](SourcePos pos, std::string msg) {
        throw DiagnosticError(Stage::Parse, {Diagnostic{unit, pos, "SyntaxError", std::move(msg)}});
    };
    auto advance = [&](std::size_t n = 1) {
        for (std::size_t k = 0; k < n && i < text.size(); ++k, ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
    };

    while (i < text.size()) {
        char c = text[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            advance();
            continue;
        }
        if (c == '#' || text.substr(i, 2) == "//") {
            while (i < text.size() && text[i] != '\n')
                advance();
            continue;
        }
        if (text.substr(i, 2) == "/*") {
            SourcePos start{line, col};
            advance(2);
            while (i < text.size() && text.substr(i, 2) != "*/")
                advance();
            if (i >= text.size())
                fail(start, "unterminated block comment");
            advance(2);
            continue;
        }

        Token tok;
        tok.pos = {line, col};
        if (ident_start(c)) {
            std::size_t start = i;
            while (i < text.size() && ident_char(text[i]))
                advance();
            tok.kind = TokKind::Ident;
            tok.text = std::string(text.substr(start, i - start));
        } else if (std::isdigit(static_cast<unsigned char>(c))) {
            std::size_t start = i;
            while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i])))
                advance();
            tok.kind = TokKind::Int;
            tok.text = std::string(text.substr(start, i - start));
            try {
                tok.int_value = std::stoll(tok.text);
            } catch (const std::out_of_range&) {
                fail(tok.pos, "integer literal out of range: " + tok.text);
            }
        } else if (c == '"') {
            advance();
            std::string value;
            bool closed = false;
            while (i < text.size()) {
                char d = text[i];
                if (d == '"') {
                    advance();
                    closed = true;
                    break;
                }
                if (d == '\n')
                    break;
                if (d == '\\' && i + 1 < text.size()) {
                    char e = text[i + 1];
                    switch (e) {
                    case 'n': value += '\n'; break;
                    case 't': value += '\t'; break;
                    case '"': value += '"'; break;
                    case '\\': value += '\\'; break;
                    default: fail({line, col}, std::string("unknown escape \\") + e);
                    }
                    advance(2);
                    continue;
                }
                value += d;
                advance();
            }
            if (!closed)
                fail(tok.pos, "unterminated string literal");
            tok.kind = TokKind::String;
            tok.text = std::move(value);
        } else {
            std::string_view two = text.substr(i, 2);
            bool matched = false;
            for (auto p : kTwoCharPunct) {
                if (two == p) {
                    tok.text = std::string(p);
                    advance(2);
                    matched = true;
                    break;
                }
            }
            if (!matched) {
                if (kOneCharPunct.find(c) == std::string_view::npos)
                    fail(tok.pos, std::string("unexpected character '") + c + "'");
                tok.text = std::string(1, c);
                advance();
            }
            tok.kind = TokKind::Punct;
        }
        out.push_back(std::move(tok));
    }

    Token end;
    end.kind = TokKind::End;
    end.pos = {line, col};
    out.push_back(end);
    return out;
}

} // namespace mashup::detail
