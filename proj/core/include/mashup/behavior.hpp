#ifndef MASHUP_BEHAVIOR_HPP
#define MASHUP_BEHAVIOR_HPP

#include "mashup/expr.hpp"
#include "mashup/metamodel.hpp"

#include <memory>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace mashup {

struct Stmt;
using StmtPtr = std::shared_ptr<const Stmt>;
using Block = std::vector<StmtPtr>;

struct VarDecl {
    std::string name;
    TypeRef type;
    ExprPtr init; // may be null
};

/// `target := value`; target is a VarRef or a FeatureNav.
struct Assign {
    ExprPtr target;
    ExprPtr value;
};

struct ExprStmt { ExprPtr expr; };

struct IfStmt {
    ExprPtr cond;
    Block then_block;
    Block else_block;
};

/// `from init until cond loop body end`; `while c loop ... end` is stored
/// with an empty init and a negated condition.
struct LoopStmt {
    Block init;
    ExprPtr until;
    Block body;
};

struct EachLoop {
    ExprPtr receiver;
    std::string param;
    Block body;
};

struct ReturnStmt { ExprPtr value; };

struct RaiseStmt { ExprPtr message; };

struct Stmt {
    using Node = std::variant<VarDecl, Assign, ExprStmt, IfStmt, LoopStmt, EachLoop, ReturnStmt, RaiseStmt>;

    SourcePos pos;
    Node node;

    template <typename T>
    const T* as() const { return std::get_if<T>(&node); }
};

struct MethodDef {
    OperationSig sig;
    Block body;
    /// Declared with `method` (reopens an inherited signature) rather than
    /// `operation` (fresh).
    bool overrides = false;
    SourcePos pos;
};

using MethodPtr = std::shared_ptr<const MethodDef>;

/// `rename op from Super as new_name;`
struct Renaming {
    std::string op;
    std::string from_class;
    std::string new_name;
    SourcePos pos;

    friend bool operator==(const Renaming& a, const Renaming& b)
    {
        return a.op == b.op && a.from_class == b.from_class && a.new_name == b.new_name;
    }
};

struct AspectClass {
    std::string class_name;
    std::vector<std::string> added_supertypes;
    std::vector<Attribute> added_attributes;
    std::vector<Reference> added_references;
    std::vector<MethodPtr> methods;
    std::vector<Renaming> renamings;
    SourcePos pos;
};

struct BehaviorModule {
    std::string package_name;
    std::vector<std::string> imports;
    std::vector<AspectClass> aspects;
    std::string source_unit;
};

/// Parses `.act` text. Throws DiagnosticError(Stage::Parse).
BehaviorModule parse_behavior(std::string_view text, const std::string& unit = "<behavior>");

} // namespace mashup

#endif // MASHUP_BEHAVIOR_HPP
