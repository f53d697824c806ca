#ifndef MASHUP_SRC_PARSER_HPP
#define MASHUP_SRC_PARSER_HPP

#include "lexer.hpp"
#include "mashup/behavior.hpp"
#include "mashup/expr.hpp"
#include "mashup/metamodel.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace mashup::detail {

/// Recursive-descent parser shared by the metamodel, constraint, action and
/// manifest formats. Reports the first error as a SyntaxError diagnostic.
class Parser {
public:
    Parser(std::string_view text, std::string unit);

    const std::string& unit() const { return unit_; }

    // Token cursor.
    const Token& peek(std::size_t ahead = 0) const;
    const Token& next();
    bool at_end() const { return peek().kind == TokKind::End; }
    bool at_punct(std::string_view p, std::size_t ahead = 0) const;
    bool at_keyword(std::string_view kw, std::size_t ahead = 0) const;
    bool accept_punct(std::string_view p);
    bool accept_keyword(std::string_view kw);
    void expect_punct(std::string_view p);
    void expect_keyword(std::string_view kw);
    Token expect_ident(std::string_view what);
    Token expect_string(std::string_view what);
    std::int64_t expect_int(std::string_view what);
    [[noreturn]] void fail(const std::string& message) const;
    [[noreturn]] void fail_at(SourcePos pos, const std::string& message) const;

    // Shared sub-grammars.
    ExprPtr parse_expr();
    TypeRef parse_type();
    std::vector<Param> parse_params();
    Bounds parse_multiplicity();
    // After the `attr` / `ref` keyword; both consume the trailing ';'.
    Attribute parse_attribute(SourcePos pos);
    Reference parse_reference(SourcePos pos);
    Block parse_block(std::initializer_list<std::string_view> terminators);
    StmtPtr parse_stmt();

private:
    ExprPtr parse_or();
    ExprPtr parse_and();
    ExprPtr parse_cmp();
    ExprPtr parse_add();
    ExprPtr parse_mul();
    ExprPtr parse_unary();
    ExprPtr parse_postfix();
    ExprPtr parse_primary();
    std::vector<ExprPtr> parse_args();
    bool is_reserved(std::string_view word) const;

    std::vector<Token> toks_;
    std::size_t pos_ = 0;
    std::string unit_;

    // Expression nesting depth; statement-level `.each { p | stmts }` is only
    // recognised at the depth where the statement's expression started.
    int depth_ = 0;
    int each_block_depth_ = -1;
    ExprPtr pending_each_;
};

/// `package X;` followed by one or more `require "unit";` (semicolons optional).
void parse_unit_header(Parser& p, std::string& package, std::vector<std::string>& imports);

} // namespace mashup::detail

#endif // MASHUP_SRC_PARSER_HPP
