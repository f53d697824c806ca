#include "mashup/expr.hpp"

#include "parser.hpp"

#include <array>

namespace mashup {

namespace {

struct CollOpInfo {
    CollOpKind kind;
    std::string_view name;
    bool lambda;
    int arity;
    bool mutating;
};

constexpr std::array<CollOpInfo, 15> kCollOps = {{
    {CollOpKind::Collect, "collect", true, 0, false},
    {CollOpKind::Select, "select", true, 0, false},
    {CollOpKind::Reject, "reject", true, 0, false},
    {CollOpKind::Each, "each", true, 0, false},
    {CollOpKind::ForAll, "forAll", true, 0, false},
    {CollOpKind::Exists, "exists", true, 0, false},
    {CollOpKind::IsEmpty, "isEmpty", false, 0, false},
    {CollOpKind::NotEmpty, "notEmpty", false, 0, false},
    {CollOpKind::Size, "size", false, 0, false},
    {CollOpKind::First, "first", false, 0, false},
    {CollOpKind::Includes, "includes", false, 1, false},
    {CollOpKind::Intersection, "intersection", false, 1, false},
    {CollOpKind::Add, "add", false, 1, true},
    {CollOpKind::Remove, "remove", false, 1, true},
    {CollOpKind::InSchedulingOrder, "inSchedulingOrder", false, 0, false},
}};

const CollOpInfo& info(CollOpKind k)
{
    for (const auto& i : kCollOps)
        if (i.kind == k)
            return i;
    return kCollOps[0];
}

} // namespace

const char* to_string(CollOpKind k) { return info(k).name.data(); }

std::optional<CollOpKind> coll_op_from_name(std::string_view name)
{
    for (const auto& i : kCollOps)
        if (i.name == name)
            return i.kind;
    return std::nullopt;
}

bool takes_lambda(CollOpKind k) { return info(k).lambda; }
int coll_op_arity(CollOpKind k) { return info(k).arity; }
bool is_mutating(CollOpKind k) { return info(k).mutating; }

const char* to_string(BinOpKind k)
{
    switch (k) {
    case BinOpKind::Add: return "+";
    case BinOpKind::Sub: return "-";
    case BinOpKind::Mul: return "*";
    case BinOpKind::Div: return "/";
    case BinOpKind::Eq: return "==";
    case BinOpKind::Ne: return "!=";
    case BinOpKind::Lt: return "<";
    case BinOpKind::Le: return "<=";
    case BinOpKind::Gt: return ">";
    case BinOpKind::Ge: return ">=";
    case BinOpKind::And: return "and";
    case BinOpKind::Or: return "or";
    }
    return "?";
}

ExprPtr parse_expr(std::string_view text, const std::string& unit)
{
    detail::Parser p(text, unit);
    ExprPtr e = p.parse_expr();
    if (!p.at_end())
        p.fail("unexpected trailing input");
    return e;
}

namespace {

std::string quote(const std::string& s)
{
    std::string out = "\"";
    for (char c : s) {
        switch (c) {
        case '"': out += "\\\""; break;
        case '\\': out += "\\\\"; break;
        case '\n': out += "\\n"; break;
        case '\t': out += "\\t"; break;
        default: out += c;
        }
    }
    return out + "\"";
}

std::string args_source(const std::vector<ExprPtr>& args)
{
    std::string out = "(";
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (i)
            out += ", ";
        out += to_source(*args[i]);
    }
    return out + ")";
}

// Operands are parenthesised whenever they are not atomic, which keeps the
// rendering unambiguous without a precedence table.
std::string operand(const Expr& e)
{
    if (e.as<BinOp>() || e.as<Not>() || e.as<Neg>())
        return "(" + to_source(e) + ")";
    return to_source(e);
}

struct SourceVisitor {
    std::string operator()(const SelfRef&) const { return "self"; }
    std::string operator()(const VarRef& v) const { return v.name; }
    std::string operator()(const IntLit& v) const { return std::to_string(v.value); }
    std::string operator()(const BoolLit& v) const { return v.value ? "true" : "false"; }
    std::string operator()(const StringLit& v) const { return quote(v.value); }
    std::string operator()(const VoidLit&) const { return "void"; }
    std::string operator()(const FeatureNav& v) const { return operand(*v.receiver) + "." + v.feature; }
    std::string operator()(const OpCall& v) const
    {
        std::string recv = v.receiver ? operand(*v.receiver) + "." : std::string();
        return recv + v.op + args_source(v.args);
    }
    std::string operator()(const CollectionOp& v) const
    {
        std::string out = operand(*v.receiver) + "." + to_string(v.kind);
        if (v.lambda)
            return out + " { " + v.lambda->param + " | " + to_source(*v.lambda->body) + " }";
        return out + args_source(v.args);
    }
    std::string operator()(const TypeTest& v) const
    {
        return operand(*v.receiver) + (v.kind == TypeTestKind::OclIsKindOf ? ".oclIsKindOf(" : ".asType(")
            + v.target + ")";
    }
    std::string operator()(const BinOp& v) const
    {
        return operand(*v.lhs) + " " + to_string(v.op) + " " + operand(*v.rhs);
    }
    std::string operator()(const Not& v) const { return "not " + operand(*v.operand); }
    std::string operator()(const Neg& v) const { return "-" + operand(*v.operand); }
    std::string operator()(const IfExpr& v) const
    {
        return "if " + to_source(*v.cond) + " then " + to_source(*v.then_branch) + " else "
            + to_source(*v.else_branch) + " end";
    }
    std::string operator()(const New& v) const { return v.class_name + ".new()"; }
    std::string operator()(const SuperCall& v) const
    {
        std::string q = v.qualifier ? "[" + *v.qualifier + "]" : std::string();
        return "super" + q + args_source(v.args);
    }
};

bool same_ptr(const ExprPtr& a, const ExprPtr& b)
{
    if (!a || !b)
        return !a && !b;
    return same_expr(*a, *b);
}

bool same_list(const std::vector<ExprPtr>& a, const std::vector<ExprPtr>& b)
{
    if (a.size() != b.size())
        return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (!same_ptr(a[i], b[i]))
            return false;
    return true;
}

struct SameVisitor {
    const Expr& other;

    template <typename T>
    const T& rhs() const { return std::get<T>(other.node); }

    bool operator()(const SelfRef&) const { return true; }
    bool operator()(const VoidLit&) const { return true; }
    bool operator()(const VarRef& v) const { return v.name == rhs<VarRef>().name; }
    bool operator()(const IntLit& v) const { return v.value == rhs<IntLit>().value; }
    bool operator()(const BoolLit& v) const { return v.value == rhs<BoolLit>().value; }
    bool operator()(const StringLit& v) const { return v.value == rhs<StringLit>().value; }
    bool operator()(const FeatureNav& v) const
    {
        const auto& o = rhs<FeatureNav>();
        return v.feature == o.feature && same_ptr(v.receiver, o.receiver);
    }
    bool operator()(const OpCall& v) const
    {
        const auto& o = rhs<OpCall>();
        return v.op == o.op && same_ptr(v.receiver, o.receiver) && same_list(v.args, o.args);
    }
    bool operator()(const CollectionOp& v) const
    {
        const auto& o = rhs<CollectionOp>();
        if (v.kind != o.kind || !same_ptr(v.receiver, o.receiver) || !same_list(v.args, o.args))
            return false;
        if (v.lambda.has_value() != o.lambda.has_value())
            return false;
        return !v.lambda || (v.lambda->param == o.lambda->param && same_ptr(v.lambda->body, o.lambda->body));
    }
    bool operator()(const TypeTest& v) const
    {
        const auto& o = rhs<TypeTest>();
        return v.kind == o.kind && v.target == o.target && same_ptr(v.receiver, o.receiver);
    }
    bool operator()(const BinOp& v) const
    {
        const auto& o = rhs<BinOp>();
        return v.op == o.op && same_ptr(v.lhs, o.lhs) && same_ptr(v.rhs, o.rhs);
    }
    bool operator()(const Not& v) const { return same_ptr(v.operand, rhs<Not>().operand); }
    bool operator()(const Neg& v) const { return same_ptr(v.operand, rhs<Neg>().operand); }
    bool operator()(const IfExpr& v) const
    {
        const auto& o = rhs<IfExpr>();
        return same_ptr(v.cond, o.cond) && same_ptr(v.then_branch, o.then_branch)
            && same_ptr(v.else_branch, o.else_branch);
    }
    bool operator()(const New& v) const { return v.class_name == rhs<New>().class_name; }
    bool operator()(const SuperCall& v) const
    {
        const auto& o = rhs<SuperCall>();
        return v.qualifier == o.qualifier && same_list(v.args, o.args);
    }
};

} // namespace

std::string to_source(const Expr& e)
{
    return std::visit(SourceVisitor{}, e.node);
}

bool same_expr(const Expr& a, const Expr& b)
{
    if (a.node.index() != b.node.index())
        return false;
    return std::visit(SameVisitor{b}, a.node);
}

} // namespace mashup
