#include "parser.hpp"

#include <algorithm>
#include <array>

namespace mashup::detail {

namespace {

constexpr std::array<std::string_view, 22> kReserved = {
    "and", "or", "not", "if", "then", "else", "end", "true", "false", "void", "self",
    "super", "var", "from", "until", "loop", "while", "do", "is", "return", "raise", "init",
};

} // namespace

Parser::Parser(std::string_view text, std::string unit)
    : toks_(tokenize(text, unit)), unit_(std::move(unit))
{
}

const Token& Parser::peek(std::size_t ahead) const
{
    std::size_t i = std::min(pos_ + ahead, toks_.size() - 1);
    return toks_[i];
}

const Token& Parser::next()
{
    const Token& t = toks_[pos_];
    if (pos_ + 1 < toks_.size())
        ++pos_;
    return t;
}

bool Parser::at_punct(std::string_view p, std::size_t ahead) const
{
    const Token& t = peek(ahead);
    return t.kind == TokKind::Punct && t.text == p;
}

bool Parser::at_keyword(std::string_view kw, std::size_t ahead) const
{
    const Token& t = peek(ahead);
    return t.kind == TokKind::Ident && t.text == kw;
}

bool Parser::accept_punct(std::string_view p)
{
    if (!at_punct(p))
        return false;
    next();
    return true;
}

bool Parser::accept_keyword(std::string_view kw)
{
    if (!at_keyword(kw))
        return false;
    next();
    return true;
}

namespace {

std::string describe(const Token& t)
{
    switch (t.kind) {
    case TokKind::End: return "end of input";
    case TokKind::Ident: return "'" + t.text + "'";
    case TokKind::Int: return "integer " + t.text;
    case TokKind::String: return "string \"" + t.text + "\"";
    case TokKind::Punct: return "'" + t.text + "'";
    }
    return "token";
}

} // namespace

void Parser::expect_punct(std::string_view p)
{
    if (!accept_punct(p))
        fail("expected '" + std::string(p) + "' but found " + describe(peek()));
}

void Parser::expect_keyword(std::string_view kw)
{
    if (!accept_keyword(kw))
        fail("expected '" + std::string(kw) + "' but found " + describe(peek()));
}

Token Parser::expect_ident(std::string_view what)
{
    if (peek().kind != TokKind::Ident)
        fail("expected " + std::string(what) + " but found " + describe(peek()));
    return next();
}

Token Parser::expect_string(std::string_view what)
{
    if (peek().kind != TokKind::String)
        fail("expected " + std::string(what) + " but found " + describe(peek()));
    return next();
}

std::int64_t Parser::expect_int(std::string_view what)
{
    if (peek().kind != TokKind::Int)
        fail("expected " + std::string(what) + " but found " + describe(peek()));
    return next().int_value;
}

void Parser::fail(const std::string& message) const
{
    fail_at(peek().pos, message);
}

void Parser::fail_at(SourcePos pos, const std::string& message) const
{
    throw DiagnosticError(Stage::Parse, {Diagnostic{unit_, pos, "SyntaxError", message}});
}

bool Parser::is_reserved(std::string_view word) const
{
    return std::find(kReserved.begin(), kReserved.end(), word) != kReserved.end();
}

// ---------------------------------------------------------------------------
// Types and signatures

TypeRef Parser::parse_type()
{
    Token name = expect_ident("type name");
    if (auto kind = coll_kind_from_name(name.text)) {
        expect_punct("<");
        TypeRef elem = parse_type();
        expect_punct(">");
        return TypeRef::collection(*kind, std::move(elem));
    }
    if (auto prim = primitive_from_name(name.text))
        return TypeRef::primitive(*prim);
    if (name.text == "Void")
        return TypeRef::void_type();
    return TypeRef::of_class(name.text);
}

std::vector<Param> Parser::parse_params()
{
    std::vector<Param> params;
    expect_punct("(");
    if (!at_punct(")")) {
        do {
            Token name = expect_ident("parameter name");
            expect_punct(":");
            params.push_back(Param{name.text, parse_type()});
        } while (accept_punct(","));
    }
    expect_punct(")");
    return params;
}

Bounds Parser::parse_multiplicity()
{
    SourcePos start = peek().pos;
    expect_punct("[");
    if (accept_punct("*")) {
        expect_punct("]");
        return Bounds::any();
    }
    std::int64_t lower = expect_int("lower bound");
    expect_punct("..");
    Bounds b;
    b.lower = static_cast<int>(lower);
    if (accept_punct("*")) {
        b.many = true;
    } else {
        std::int64_t upper = expect_int("upper bound");
        if (upper != 1)
            fail_at(start, "upper bound must be 1 or *, got " + std::to_string(upper));
        if (lower > upper)
            fail_at(start, "lower bound exceeds upper bound");
    }
    expect_punct("]");
    return b;
}

Attribute Parser::parse_attribute(SourcePos pos)
{
    Attribute a;
    a.pos = pos;
    a.name = expect_ident("attribute name").text;
    expect_punct(":");
    Token type = expect_ident("primitive type");
    auto prim = primitive_from_name(type.text);
    if (!prim)
        fail_at(type.pos, "attribute type must be Int, Bool or String, got '" + type.text + "'");
    a.type = *prim;
    if (at_punct("["))
        a.multiplicity = parse_multiplicity();
    expect_punct(";");
    return a;
}

Reference Parser::parse_reference(SourcePos pos)
{
    Reference r;
    r.pos = pos;
    r.name = expect_ident("reference name").text;
    expect_punct(":");
    r.target = expect_ident("target class").text;
    if (at_punct("["))
        r.multiplicity = parse_multiplicity();
    if (accept_keyword("containment"))
        r.is_containment = true;
    if (accept_keyword("opposite"))
        r.opposite = expect_ident("opposite reference").text;
    expect_punct(";");
    return r;
}

// ---------------------------------------------------------------------------
// Expressions

ExprPtr Parser::parse_expr()
{
    return parse_or();
}

ExprPtr Parser::parse_or()
{
    ExprPtr lhs = parse_and();
    while (at_keyword("or")) {
        SourcePos pos = next().pos;
        lhs = make_expr(pos, BinOp{BinOpKind::Or, lhs, parse_and()});
    }
    return lhs;
}

ExprPtr Parser::parse_and()
{
    ExprPtr lhs = parse_cmp();
    while (at_keyword("and")) {
        SourcePos pos = next().pos;
        lhs = make_expr(pos, BinOp{BinOpKind::And, lhs, parse_cmp()});
    }
    return lhs;
}

ExprPtr Parser::parse_cmp()
{
    ExprPtr lhs = parse_add();
    static constexpr std::pair<std::string_view, BinOpKind> ops[] = {
        {"==", BinOpKind::Eq}, {"!=", BinOpKind::Ne}, {"<=", BinOpKind::Le},
        {">=", BinOpKind::Ge}, {"<", BinOpKind::Lt},  {">", BinOpKind::Gt},
    };
    for (auto [text, kind] : ops) {
        if (at_punct(text)) {
            SourcePos pos = next().pos;
            return make_expr(pos, BinOp{kind, lhs, parse_add()});
        }
    }
    return lhs;
}

ExprPtr Parser::parse_add()
{
    ExprPtr lhs = parse_mul();
    while (at_punct("+") || at_punct("-")) {
        const Token& t = next();
        BinOpKind k = t.text == "+" ? BinOpKind::Add : BinOpKind::Sub;
        lhs = make_expr(t.pos, BinOp{k, lhs, parse_mul()});
    }
    return lhs;
}

ExprPtr Parser::parse_mul()
{
    ExprPtr lhs = parse_unary();
    while (at_punct("*") || at_punct("/")) {
        const Token& t = next();
        BinOpKind k = t.text == "*" ? BinOpKind::Mul : BinOpKind::Div;
        lhs = make_expr(t.pos, BinOp{k, lhs, parse_unary()});
    }
    return lhs;
}

ExprPtr Parser::parse_unary()
{
    if (at_keyword("not")) {
        SourcePos pos = next().pos;
        return make_expr(pos, Not{parse_unary()});
    }
    if (at_punct("-")) {
        SourcePos pos = next().pos;
        return make_expr(pos, Neg{parse_unary()});
    }
    return parse_postfix();
}

std::vector<ExprPtr> Parser::parse_args()
{
    std::vector<ExprPtr> args;
    expect_punct("(");
    ++depth_;
    if (!at_punct(")")) {
        do {
            args.push_back(parse_expr());
        } while (accept_punct(","));
    }
    --depth_;
    expect_punct(")");
    return args;
}

ExprPtr Parser::parse_postfix()
{
    int my_depth = depth_;
    ExprPtr e = parse_primary();
    while (at_punct(".")) {
        // Statement-level `recv.each { p | stmts }` is handed back to parse_stmt.
        if (each_block_depth_ == my_depth && at_keyword("each", 1) && at_punct("{", 2)) {
            pending_each_ = e;
            return e;
        }
        next();
        Token member = expect_ident("feature or operation name");
        const std::string& name = member.text;

        if ((name == "oclIsKindOf" || name == "asType" || name == "oclAsType") && at_punct("(")) {
            next();
            Token target = expect_ident("class name");
            expect_punct(")");
            TypeTestKind kind = name == "oclIsKindOf" ? TypeTestKind::OclIsKindOf : TypeTestKind::AsType;
            e = make_expr(member.pos, TypeTest{e, kind, target.text});
            continue;
        }
        auto coll = coll_op_from_name(name);
        if (coll && takes_lambda(*coll) && at_punct("{")) {
            next();
            ++depth_;
            Token param = expect_ident("lambda parameter");
            expect_punct("|");
            ExprPtr body = parse_expr();
            --depth_;
            expect_punct("}");
            e = make_expr(member.pos, CollectionOp{e, *coll, Lambda{param.text, body}, {}});
            continue;
        }
        if (at_punct("(")) {
            SourcePos call_pos = member.pos;
            std::vector<ExprPtr> args = parse_args();
            if (coll && !takes_lambda(*coll)) {
                if (static_cast<int>(args.size()) != coll_op_arity(*coll))
                    fail_at(call_pos, std::string(to_string(*coll)) + " expects "
                                          + std::to_string(coll_op_arity(*coll)) + " argument(s)");
                e = make_expr(call_pos, CollectionOp{e, *coll, std::nullopt, std::move(args)});
            } else {
                if (coll)
                    fail_at(call_pos, std::string(to_string(*coll)) + " requires a lambda '{ x | ... }'");
                e = make_expr(call_pos, OpCall{e, name, std::move(args)});
            }
            continue;
        }
        e = make_expr(member.pos, FeatureNav{e, name});
    }
    return e;
}

ExprPtr Parser::parse_primary()
{
    const Token& t = peek();
    SourcePos pos = t.pos;
    switch (t.kind) {
    case TokKind::Int: {
        std::int64_t v = next().int_value;
        return make_expr(pos, IntLit{v});
    }
    case TokKind::String: {
        std::string s = next().text;
        return make_expr(pos, StringLit{std::move(s)});
    }
    case TokKind::Punct:
        if (accept_punct("(")) {
            ++depth_;
            ExprPtr inner = parse_expr();
            --depth_;
            expect_punct(")");
            return inner;
        }
        fail("expected expression but found '" + t.text + "'");
    case TokKind::End:
        fail("expected expression but found end of input");
    case TokKind::Ident:
        break;
    }

    if (accept_keyword("true"))
        return make_expr(pos, BoolLit{true});
    if (accept_keyword("false"))
        return make_expr(pos, BoolLit{false});
    if (accept_keyword("void"))
        return make_expr(pos, VoidLit{});
    if (accept_keyword("self"))
        return make_expr(pos, SelfRef{});
    if (accept_keyword("super")) {
        SuperCall call;
        if (accept_punct("[")) {
            call.qualifier = expect_ident("supertype name").text;
            expect_punct("]");
        }
        call.args = parse_args();
        return make_expr(pos, std::move(call));
    }
    if (accept_keyword("if")) {
        ++depth_;
        ExprPtr cond = parse_expr();
        expect_keyword("then");
        ExprPtr then_branch = parse_expr();
        expect_keyword("else");
        ExprPtr else_branch = parse_expr();
        expect_keyword("end");
        --depth_;
        return make_expr(pos, IfExpr{cond, then_branch, else_branch});
    }
    if (is_reserved(t.text))
        fail("unexpected keyword '" + t.text + "' in expression");

    std::string name = next().text;
    if (at_punct(".") && at_keyword("new", 1) && at_punct("(", 2) && at_punct(")", 3)) {
        next();
        next();
        next();
        next();
        return make_expr(pos, New{name});
    }
    if (at_punct("(")) {
        std::vector<ExprPtr> args = parse_args();
        return make_expr(pos, OpCall{nullptr, name, std::move(args)});
    }
    return make_expr(pos, VarRef{name});
}

// ---------------------------------------------------------------------------
// Statements

Block Parser::parse_block(std::initializer_list<std::string_view> terminators)
{
    Block block;
    auto at_terminator = [&] {
        if (at_end())
            return true;
        for (auto term : terminators) {
            if (term == "}" ? at_punct("}") : at_keyword(term))
                return true;
        }
        return false;
    };
    while (!at_terminator()) {
        if (accept_punct(";"))
            continue;
        block.push_back(parse_stmt());
    }
    if (at_end()) {
        std::string expected;
        for (auto term : terminators)
            expected += (expected.empty() ? "'" : " or '") + std::string(term) + "'";
        fail("unexpected end of input, expected " + expected);
    }
    return block;
}

StmtPtr Parser::parse_stmt()
{
    SourcePos pos = peek().pos;
    auto make = [&](auto node) {
        accept_punct(";");
        return std::make_shared<const Stmt>(Stmt{pos, Stmt::Node(std::move(node))});
    };

    if (accept_keyword("var")) {
        Token name = expect_ident("variable name");
        expect_punct(":");
        TypeRef type = parse_type();
        ExprPtr init;
        if (accept_keyword("init") || accept_punct(":="))
            init = parse_expr();
        return make(VarDecl{name.text, std::move(type), init});
    }
    if (accept_keyword("if")) {
        ExprPtr cond = parse_expr();
        expect_keyword("then");
        Block then_block = parse_block({"else", "end"});
        Block else_block;
        if (accept_keyword("else")) {
            if (at_keyword("if")) {
                // `else if ... end` chains share the closing `end`.
                else_block.push_back(parse_stmt());
                return make(IfStmt{cond, std::move(then_block), std::move(else_block)});
            }
            else_block = parse_block({"end"});
        }
        expect_keyword("end");
        return make(IfStmt{cond, std::move(then_block), std::move(else_block)});
    }
    if (accept_keyword("from")) {
        Block init = parse_block({"until"});
        expect_keyword("until");
        ExprPtr until = parse_expr();
        expect_keyword("loop");
        Block body = parse_block({"end"});
        expect_keyword("end");
        return make(LoopStmt{std::move(init), until, std::move(body)});
    }
    if (accept_keyword("while")) {
        ExprPtr cond = parse_expr();
        expect_keyword("loop");
        Block body = parse_block({"end"});
        expect_keyword("end");
        ExprPtr until = make_expr(cond->pos, Not{cond});
        return make(LoopStmt{{}, until, std::move(body)});
    }
    if (accept_keyword("return")) {
        ExprPtr value;
        if (!at_punct(";") && !at_keyword("end") && !at_keyword("else") && !at_punct("}") && !at_end())
            value = parse_expr();
        return make(ReturnStmt{value});
    }
    if (accept_keyword("raise"))
        return make(RaiseStmt{parse_expr()});

    int saved_each = each_block_depth_;
    each_block_depth_ = depth_;
    pending_each_ = nullptr;
    ExprPtr e = parse_expr();
    each_block_depth_ = saved_each;

    if (pending_each_) {
        if (pending_each_ != e)
            fail("'each' block must end the statement");
        pending_each_ = nullptr;
        expect_punct(".");
        expect_keyword("each");
        expect_punct("{");
        Token param = expect_ident("lambda parameter");
        expect_punct("|");
        Block body = parse_block({"}"});
        expect_punct("}");
        return make(EachLoop{e, param.text, std::move(body)});
    }
    if (at_punct(":=")) {
        SourcePos assign_pos = next().pos;
        if (!e->as<VarRef>() && !e->as<FeatureNav>())
            fail_at(assign_pos, "left-hand side of ':=' must be a variable or a feature");
        ExprPtr value = parse_expr();
        return make(Assign{e, value});
    }
    return make(ExprStmt{e});
}

} // namespace mashup::detail
