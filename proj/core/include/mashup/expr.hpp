#ifndef MASHUP_EXPR_HPP
#define MASHUP_EXPR_HPP

#include "mashup/diagnostic.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace mashup {

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct SelfRef {};
struct VarRef { std::string name; };
struct IntLit { std::int64_t value = 0; };
struct BoolLit { bool value = false; };
struct StringLit { std::string value; };
struct VoidLit {};

struct FeatureNav {
    ExprPtr receiver;
    std::string feature;
};

/// Operation invocation. A null receiver means an implicit `self`.
struct OpCall {
    ExprPtr receiver;
    std::string op;
    std::vector<ExprPtr> args;
};

enum class CollOpKind {
    Collect, Select, Reject, Each, ForAll, Exists,
    IsEmpty, NotEmpty, Size, First, Includes, Intersection,
    Add, Remove,
    InSchedulingOrder,
};

const char* to_string(CollOpKind k);
std::optional<CollOpKind> coll_op_from_name(std::string_view name);
bool takes_lambda(CollOpKind k);
/// Number of positional arguments (lambda ops take none).
int coll_op_arity(CollOpKind k);
bool is_mutating(CollOpKind k);

struct Lambda {
    std::string param;
    ExprPtr body;
};

struct CollectionOp {
    ExprPtr receiver;
    CollOpKind kind = CollOpKind::Size;
    std::optional<Lambda> lambda;
    std::vector<ExprPtr> args;
};

enum class TypeTestKind { OclIsKindOf, AsType };

struct TypeTest {
    ExprPtr receiver;
    TypeTestKind kind = TypeTestKind::OclIsKindOf;
    std::string target;
};

enum class BinOpKind { Add, Sub, Mul, Div, Eq, Ne, Lt, Le, Gt, Ge, And, Or };

const char* to_string(BinOpKind k);

struct BinOp {
    BinOpKind op = BinOpKind::Add;
    ExprPtr lhs;
    ExprPtr rhs;
};

struct Not { ExprPtr operand; };
struct Neg { ExprPtr operand; };

struct IfExpr {
    ExprPtr cond;
    ExprPtr then_branch;
    ExprPtr else_branch;
};

struct New { std::string class_name; };

/// `super(args)` or `super[Q](args)`: continues dispatch of the enclosing
/// method past the current class, or from class Q.
struct SuperCall {
    std::optional<std::string> qualifier;
    std::vector<ExprPtr> args;
};

struct Expr {
    using Node = std::variant<SelfRef, VarRef, IntLit, BoolLit, StringLit, VoidLit, FeatureNav, OpCall,
                              CollectionOp, TypeTest, BinOp, Not, Neg, IfExpr, New, SuperCall>;

    SourcePos pos;
    Node node;

    template <typename T>
    const T* as() const { return std::get_if<T>(&node); }
};

template <typename T>
ExprPtr make_expr(SourcePos pos, T node)
{
    return std::make_shared<const Expr>(Expr{pos, Expr::Node(std::move(node))});
}

/// Parses a standalone expression. Throws DiagnosticError(Stage::Parse).
ExprPtr parse_expr(std::string_view text, const std::string& unit = "<expr>");

/// Renders an expression back to parseable source text.
std::string to_source(const Expr& e);

/// Structural equality ignoring source positions.
bool same_expr(const Expr& a, const Expr& b);

} // namespace mashup

#endif // MASHUP_EXPR_HPP
