#ifndef MASHUP_TYPECHECK_HPP
#define MASHUP_TYPECHECK_HPP

#include "mashup/composer.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace mashup {

/// Static environment for checking one expression or method body.
struct TypeContext {
    const WovenModel* model = nullptr;
    std::string unit;
    std::optional<std::string> self_class;
    /// Contracts are pure: no `new`, no mutating collection ops, no calls to
    /// user operations.
    bool pure = true;
    // Enclosing method, for `super` and `return`.
    std::string method_class;
    std::string method_name;
    TypeRef return_type = TypeRef::void_type();

    std::vector<std::map<std::string, TypeRef>> scopes{1};

    void push() { scopes.emplace_back(); }
    void pop() { scopes.pop_back(); }
    /// False if the name is already bound in the innermost scope.
    bool bind(const std::string& name, TypeRef t);
    const TypeRef* lookup(const std::string& name) const;
};

/// Built-in operations every object understands.
struct Builtin {
    const char* name;
    std::vector<TypeRef> params;
    TypeRef result;
    bool pure;
};

const Builtin* find_builtin(std::string_view name);

/// Infers the static type of `e`, appending diagnostics to `out`. nullopt
/// means the expression is ill-typed (at least one diagnostic was emitted).
std::optional<TypeRef> infer_type(const Expr& e, TypeContext& ctx, std::vector<Diagnostic>& out);

/// Throwing form: DiagnosticError(Stage::Type) when ill-typed.
TypeRef typecheck_expr(const Expr& e, TypeContext& ctx);

/// Checks a method body in the context of the class it is woven into.
std::vector<Diagnostic> typecheck_method(const MethodEntry& m, const WovenModel& wm);

std::vector<Diagnostic> typecheck_behavior(const BehaviorModule& bm, const WovenModel& wm);
std::vector<Diagnostic> typecheck_contracts(const ContractModule& cm, const WovenModel& wm);

/// Every constraint and behavior unit of a composed language.
std::vector<Diagnostic> typecheck_units(const std::vector<LoadedUnit>& units, const WovenModel& wm);

} // namespace mashup

#endif // MASHUP_TYPECHECK_HPP
