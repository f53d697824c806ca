#include "mashup/typecheck.hpp"

#include <algorithm>

namespace mashup {

bool TypeContext::bind(const std::string& name, TypeRef t)
{
    return scopes.back().emplace(name, std::move(t)).second;
}

const TypeRef* TypeContext::lookup(const std::string& name) const
{
    for (auto s = scopes.rbegin(); s != scopes.rend(); ++s) {
        auto it = s->find(name);
        if (it != s->end())
            return &it->second;
    }
    return nullptr;
}

const Builtin* find_builtin(std::string_view name)
{
    static const std::vector<Builtin> builtins = {
        {"trace", {TypeRef::primitive(PrimitiveType::String)}, TypeRef::void_type(), false},
        {"container", {}, TypeRef::of_class(std::string(kRootClass)), true},
    };
    for (const auto& b : builtins)
        if (name == b.name)
            return &b;
    return nullptr;
}

namespace {

using MaybeType = std::optional<TypeRef>;

const TypeRef kInt = TypeRef::primitive(PrimitiveType::Int);
const TypeRef kBool = TypeRef::primitive(PrimitiveType::Bool);
const TypeRef kString = TypeRef::primitive(PrimitiveType::String);

class Checker {
public:
    Checker(TypeContext& ctx, std::vector<Diagnostic>& out) : ctx_(ctx), out_(out), wm_(*ctx.model) {}

    MaybeType expr(const Expr& e) { return std::visit([&](const auto& n) { return node(e, n); }, e.node); }

    void block(const Block& b)
    {
        ctx_.push();
        for (const auto& s : b)
            stmt(*s);
        ctx_.pop();
    }

    void stmt(const Stmt& s)
    {
        std::visit([&](const auto& n) { stmt_node(s, n); }, s.node);
    }

    MaybeType expect_bool(const Expr& e, const std::string& what)
    {
        auto t = expr(e);
        if (t && !(*t == kBool)) {
            error(e.pos, "TypeError", what + " must be Boolean, found " + t->str());
            return std::nullopt;
        }
        return t;
    }

    void error(SourcePos pos, std::string code, std::string msg)
    {
        out_.push_back({ctx_.unit, pos, std::move(code), std::move(msg)});
    }

private:
    bool closed(const TypeRef& t) const
    {
        const TypeRef* cur = &t;
        while (cur->is_collection())
            cur = &cur->element();
        return !cur->is_class() || wm_.find(cur->class_name());
    }

    void check_assignable(const TypeRef& value, const TypeRef& target, SourcePos pos, const std::string& what)
    {
        if (!wm_.conforms(value, target))
            error(pos, "TypeError", "cannot assign " + value.str() + " to " + what + " of type " + target.str());
    }

    // Expressions ------------------------------------------------------------

    MaybeType node(const Expr& e, const SelfRef&)
    {
        if (!ctx_.self_class) {
            error(e.pos, "UnboundVariable", "'self' is not bound here");
            return std::nullopt;
        }
        return TypeRef::of_class(*ctx_.self_class);
    }

    MaybeType node(const Expr& e, const VarRef& v)
    {
        if (const TypeRef* t = ctx_.lookup(v.name))
            return *t;
        error(e.pos, "UnboundVariable", "unknown variable '" + v.name + "'");
        return std::nullopt;
    }

    MaybeType node(const Expr&, const IntLit&) { return kInt; }
    MaybeType node(const Expr&, const BoolLit&) { return kBool; }
    MaybeType node(const Expr&, const StringLit&) { return kString; }
    MaybeType node(const Expr&, const VoidLit&) { return TypeRef::null_type(); }

    MaybeType node(const Expr& e, const FeatureNav& f)
    {
        auto r = expr(*f.receiver);
        if (!r)
            return std::nullopt;
        if (!r->is_class()) {
            error(e.pos, "TypeError", "cannot navigate '" + f.feature + "' on a value of type " + r->str());
            return std::nullopt;
        }
        const WovenClass& wc = wm_.at(r->class_name());
        if (const WovenFeature* feat = wc.feature(f.feature))
            return feat->static_type();
        error(e.pos, "UnknownFeature", "class " + wc.name + " has no feature '" + f.feature + "'");
        return std::nullopt;
    }

    bool check_args(const Expr& e, const std::string& what, const std::vector<ExprPtr>& args,
                    const std::vector<TypeRef>& params)
    {
        bool ok = true;
        if (args.size() != params.size()) {
            error(e.pos, "ArityMismatch",
                  what + " expects " + std::to_string(params.size()) + " argument(s), got "
                      + std::to_string(args.size()));
            ok = false;
        }
        for (std::size_t i = 0; i < args.size(); ++i) {
            auto t = expr(*args[i]);
            if (!t) {
                ok = false;
                continue;
            }
            if (i < params.size() && !wm_.conforms(*t, params[i])) {
                error(args[i]->pos, "TypeError",
                      "argument " + std::to_string(i + 1) + " of " + what + " must be " + params[i].str()
                          + ", found " + t->str());
                ok = false;
            }
        }
        return ok;
    }

    MaybeType call(const Expr& e, const TypeRef& recv, const std::string& op, const std::vector<ExprPtr>& args)
    {
        if (!recv.is_class()) {
            error(e.pos, "TypeError", "cannot invoke '" + op + "' on a value of type " + recv.str());
            for (const auto& a : args)
                expr(*a);
            return std::nullopt;
        }
        if (const Builtin* b = find_builtin(op)) {
            if (ctx_.pure && !b->pure)
                error(e.pos, "PurityError", "'" + op + "' has side effects and cannot be used in a contract");
            if (!check_args(e, op, args, b->params))
                return std::nullopt;
            return b->result;
        }
        const WovenClass& wc = wm_.at(recv.class_name());
        const SignatureEntry* sig = wc.signature(op);
        if (!sig) {
            error(e.pos, "UnknownOperation", "class " + wc.name + " has no operation '" + op + "'");
            for (const auto& a : args)
                expr(*a);
            return std::nullopt;
        }
        if (ctx_.pure)
            error(e.pos, "PurityError", "contracts cannot call the operation '" + op + "'");
        std::vector<TypeRef> params;
        for (const auto& p : sig->sig.params)
            params.push_back(p.type);
        if (!check_args(e, wc.name + "." + op, args, params))
            return std::nullopt;
        return sig->sig.return_type;
    }

    MaybeType node(const Expr& e, const OpCall& c)
    {
        MaybeType recv;
        if (c.receiver)
            recv = expr(*c.receiver);
        else if (ctx_.self_class)
            recv = TypeRef::of_class(*ctx_.self_class);
        else
            error(e.pos, "UnboundVariable", "implicit 'self' is not bound here");
        if (!recv) {
            for (const auto& a : c.args)
                expr(*a);
            return std::nullopt;
        }
        return call(e, *recv, c.op, c.args);
    }

    MaybeType node(const Expr& e, const CollectionOp& c)
    {
        auto recv = expr(*c.receiver);
        if (!recv)
            return std::nullopt;
        // `obj.add(x)` on an object is an ordinary operation call.
        if (recv->is_class() && !c.lambda)
            return call(e, *recv, to_string(c.kind), c.args);
        if (!recv->is_collection()) {
            error(e.pos, "TypeError",
                  std::string("'") + to_string(c.kind) + "' needs a collection, found " + recv->str());
            return std::nullopt;
        }
        const TypeRef elem = recv->element();

        if (c.lambda) {
            ctx_.push();
            ctx_.bind(c.lambda->param, elem);
            MaybeType body = expr(*c.lambda->body);
            ctx_.pop();
            if (!body)
                return std::nullopt;
            switch (c.kind) {
            case CollOpKind::Collect:
                if (body->is_void()) {
                    error(c.lambda->body->pos, "TypeError", "collect body has no value");
                    return std::nullopt;
                }
                return TypeRef::collection(CollKind::Sequence, *body);
            case CollOpKind::Select:
            case CollOpKind::Reject:
                if (!(*body == kBool)) {
                    error(c.lambda->body->pos, "TypeError", "select/reject body must be Boolean");
                    return std::nullopt;
                }
                return *recv;
            case CollOpKind::ForAll:
            case CollOpKind::Exists:
                if (!(*body == kBool)) {
                    error(c.lambda->body->pos, "TypeError", "forAll/exists body must be Boolean");
                    return std::nullopt;
                }
                return kBool;
            case CollOpKind::Each:
                return TypeRef::void_type();
            default: break;
            }
            return std::nullopt;
        }

        auto arg = [&]() -> MaybeType { return c.args.empty() ? std::nullopt : expr(*c.args.front()); };
        switch (c.kind) {
        case CollOpKind::IsEmpty:
        case CollOpKind::NotEmpty: return kBool;
        case CollOpKind::Size: return kInt;
        case CollOpKind::First: return elem;
        case CollOpKind::InSchedulingOrder: return TypeRef::collection(CollKind::Sequence, elem);
        case CollOpKind::Includes: {
            auto a = arg();
            if (!a)
                return std::nullopt;
            if (!wm_.conforms(*a, elem) && !wm_.conforms(elem, *a)) {
                error(e.pos, "TypeError", "includes argument " + a->str() + " is unrelated to " + elem.str());
                return std::nullopt;
            }
            return kBool;
        }
        case CollOpKind::Intersection: {
            auto a = arg();
            if (!a)
                return std::nullopt;
            if (!a->is_collection() || (!wm_.conforms(a->element(), elem) && !wm_.conforms(elem, a->element()))) {
                error(e.pos, "TypeError", "intersection argument " + a->str() + " is not compatible with " + recv->str());
                return std::nullopt;
            }
            return *recv;
        }
        case CollOpKind::Add:
        case CollOpKind::Remove: {
            if (ctx_.pure)
                error(e.pos, "PurityError", std::string("'") + to_string(c.kind) + "' mutates and cannot be used in a contract");
            const Expr& r = *c.receiver;
            if (!r.as<FeatureNav>() && !r.as<VarRef>())
                error(e.pos, "TypeError",
                      std::string("'") + to_string(c.kind) + "' needs a feature or variable as receiver");
            auto a = arg();
            if (!a)
                return std::nullopt;
            if (!wm_.conforms(*a, elem)) {
                error(e.pos, "TypeError", "cannot add " + a->str() + " to " + recv->str());
                return std::nullopt;
            }
            return TypeRef::void_type();
        }
        default: break;
        }
        return std::nullopt;
    }

    MaybeType node(const Expr& e, const TypeTest& t)
    {
        auto recv = expr(*t.receiver);
        if (!wm_.find(t.target)) {
            error(e.pos, "UnknownClass", "unknown class '" + t.target + "'");
            return std::nullopt;
        }
        if (!recv)
            return std::nullopt;
        if (!recv->is_class() && recv->kind() != TypeRef::Kind::Null) {
            error(e.pos, "TypeError", "type test on a non-object value of type " + recv->str());
            return std::nullopt;
        }
        if (t.kind == TypeTestKind::OclIsKindOf)
            return kBool;
        return TypeRef::of_class(t.target);
    }

    MaybeType node(const Expr& e, const BinOp& b)
    {
        auto l = expr(*b.lhs);
        auto r = expr(*b.rhs);
        if (!l || !r)
            return std::nullopt;
        auto bad = [&]() -> MaybeType {
            error(e.pos, "TypeError",
                  std::string("operator '") + to_string(b.op) + "' cannot combine " + l->str() + " and " + r->str());
            return std::nullopt;
        };
        switch (b.op) {
        case BinOpKind::Add:
            if (*l == kInt && *r == kInt)
                return kInt;
            if ((*l == kString && r->is_primitive()) || (*r == kString && l->is_primitive()))
                return kString;
            return bad();
        case BinOpKind::Sub:
        case BinOpKind::Mul:
        case BinOpKind::Div:
            if (*l == kInt && *r == kInt)
                return kInt;
            return bad();
        case BinOpKind::Lt:
        case BinOpKind::Le:
        case BinOpKind::Gt:
        case BinOpKind::Ge:
            if ((*l == kInt && *r == kInt) || (*l == kString && *r == kString))
                return kBool;
            return bad();
        case BinOpKind::And:
        case BinOpKind::Or:
            if (*l == kBool && *r == kBool)
                return kBool;
            return bad();
        case BinOpKind::Eq:
        case BinOpKind::Ne:
            if (l->is_primitive() || r->is_primitive()) {
                if (*l == *r)
                    return kBool;
                return bad();
            }
            if (l->is_void() || r->is_void())
                return bad();
            if (l->is_collection() != r->is_collection()
                && l->kind() != TypeRef::Kind::Null && r->kind() != TypeRef::Kind::Null)
                return bad();
            return kBool;
        }
        return bad();
    }

    MaybeType node(const Expr& e, const Not& n)
    {
        auto t = expr(*n.operand);
        if (t && !(*t == kBool)) {
            error(e.pos, "TypeError", "'not' needs a Boolean, found " + t->str());
            return std::nullopt;
        }
        return t ? MaybeType(kBool) : std::nullopt;
    }

    MaybeType node(const Expr& e, const Neg& n)
    {
        auto t = expr(*n.operand);
        if (t && !(*t == kInt)) {
            error(e.pos, "TypeError", "unary '-' needs an Integer, found " + t->str());
            return std::nullopt;
        }
        return t ? MaybeType(kInt) : std::nullopt;
    }

    MaybeType join(const TypeRef& a, const TypeRef& b) const
    {
        if (wm_.conforms(a, b))
            return b;
        if (wm_.conforms(b, a))
            return a;
        if (a.is_class() && b.is_class()) {
            for (const auto& k : wm_.at(a.class_name()).linearization)
                if (wm_.is_kind_of(b.class_name(), k))
                    return TypeRef::of_class(k);
        }
        return std::nullopt;
    }

    MaybeType node(const Expr& e, const IfExpr& i)
    {
        auto c = expect_bool(*i.cond, "if condition");
        auto t = expr(*i.then_branch);
        auto f = expr(*i.else_branch);
        if (!c || !t || !f)
            return std::nullopt;
        auto j = join(*t, *f);
        if (!j)
            error(e.pos, "TypeError", "if branches have unrelated types " + t->str() + " and " + f->str());
        return j;
    }

    MaybeType node(const Expr& e, const New& n)
    {
        if (ctx_.pure)
            error(e.pos, "PurityError", "contracts cannot create objects");
        const WovenClass* wc = wm_.find(n.class_name);
        if (!wc) {
            error(e.pos, "UnknownClass", "unknown class '" + n.class_name + "'");
            return std::nullopt;
        }
        if (wc->is_abstract) {
            error(e.pos, "AbstractInstantiation", "cannot instantiate abstract class " + n.class_name);
            return std::nullopt;
        }
        return TypeRef::of_class(n.class_name);
    }

    MaybeType node(const Expr& e, const SuperCall& s)
    {
        if (ctx_.method_class.empty()) {
            error(e.pos, "InvalidSuper", "'super' outside a method");
            return std::nullopt;
        }
        const WovenClass& owner = wm_.at(ctx_.method_class);
        auto defines = [&](const std::string& k) {
            const WovenClass* kc = wm_.find(k);
            return kc && std::any_of(kc->own_methods.begin(), kc->own_methods.end(), [&](const MethodEntry& m) {
                       return m.method->sig.name == ctx_.method_name;
                   });
        };
        std::string found;
        if (s.qualifier) {
            const auto& q = *s.qualifier;
            if (std::find(owner.supertypes.begin(), owner.supertypes.end(), q) == owner.supertypes.end()) {
                error(e.pos, "InvalidSuper", q + " is not a direct supertype of " + owner.name);
                return std::nullopt;
            }
            for (const auto& k : wm_.at(q).linearization)
                if (defines(k)) {
                    found = k;
                    break;
                }
        } else {
            for (std::size_t i = 1; i < owner.linearization.size(); ++i)
                if (defines(owner.linearization[i])) {
                    found = owner.linearization[i];
                    break;
                }
        }
        if (found.empty()) {
            error(e.pos, "InvalidSuper",
                  "no inherited body of '" + ctx_.method_name + "' above " + (s.qualifier ? *s.qualifier : owner.name));
            return std::nullopt;
        }
        const WovenClass& fc = wm_.at(found);
        const MethodEntry* m = nullptr;
        for (const auto& me : fc.own_methods)
            if (me.method->sig.name == ctx_.method_name)
                m = &me;
        std::vector<TypeRef> params;
        for (const auto& p : m->method->sig.params)
            params.push_back(p.type);
        if (!check_args(e, "super." + ctx_.method_name, s.args, params))
            return std::nullopt;
        return m->method->sig.return_type;
    }

    // Statements -------------------------------------------------------------

    void stmt_node(const Stmt& s, const VarDecl& v)
    {
        if (!closed(v.type))
            error(s.pos, "UnknownClass", "unknown type " + v.type.str() + " for variable '" + v.name + "'");
        if (v.init) {
            if (auto t = expr(*v.init))
                check_assignable(*t, v.type, v.init->pos, "variable '" + v.name + "'");
        }
        if (v.name == "self" || !ctx_.bind(v.name, v.type))
            error(s.pos, "DuplicateVariable", "variable '" + v.name + "' is already declared in this scope");
    }

    void stmt_node(const Stmt& s, const Assign& a)
    {
        auto value = expr(*a.value);
        if (const VarRef* v = a.target->as<VarRef>()) {
            const TypeRef* t = ctx_.lookup(v->name);
            if (!t) {
                error(a.target->pos, "UnboundVariable", "unknown variable '" + v->name + "'");
                return;
            }
            if (value)
                check_assignable(*value, *t, s.pos, "variable '" + v->name + "'");
            return;
        }
        auto target = expr(*a.target);
        if (target && value)
            check_assignable(*value, *target, s.pos, "feature '" + a.target->as<FeatureNav>()->feature + "'");
    }

    void stmt_node(const Stmt&, const ExprStmt& e) { expr(*e.expr); }

    void stmt_node(const Stmt&, const IfStmt& i)
    {
        expect_bool(*i.cond, "if condition");
        block(i.then_block);
        block(i.else_block);
    }

    void stmt_node(const Stmt&, const LoopStmt& l)
    {
        ctx_.push();
        for (const auto& s : l.init)
            stmt(*s);
        expect_bool(*l.until, "loop condition");
        block(l.body);
        ctx_.pop();
    }

    void stmt_node(const Stmt& s, const EachLoop& l)
    {
        auto recv = expr(*l.receiver);
        ctx_.push();
        if (recv && !recv->is_collection())
            error(s.pos, "TypeError", "'each' needs a collection, found " + recv->str());
        ctx_.bind(l.param, recv && recv->is_collection() ? recv->element() : TypeRef::null_type());
        for (const auto& st : l.body)
            stmt(*st);
        ctx_.pop();
    }

    void stmt_node(const Stmt& s, const ReturnStmt& r)
    {
        if (!r.value) {
            if (!ctx_.return_type.is_void())
                error(s.pos, "ReturnMismatch", "'" + ctx_.method_name + "' must return " + ctx_.return_type.str());
            return;
        }
        auto t = expr(*r.value);
        if (ctx_.return_type.is_void()) {
            error(s.pos, "ReturnMismatch", "'" + ctx_.method_name + "' returns Void but a value is returned");
            return;
        }
        if (t && !wm_.conforms(*t, ctx_.return_type))
            error(s.pos, "ReturnMismatch",
                  "'" + ctx_.method_name + "' returns " + ctx_.return_type.str() + ", found " + t->str());
    }

    void stmt_node(const Stmt& s, const RaiseStmt& r)
    {
        auto t = expr(*r.message);
        if (t && !t->is_primitive())
            error(s.pos, "TypeError", "raise needs a String message, found " + t->str());
    }

    TypeContext& ctx_;
    std::vector<Diagnostic>& out_;
    const WovenModel& wm_;
};

} // namespace

std::optional<TypeRef> infer_type(const Expr& e, TypeContext& ctx, std::vector<Diagnostic>& out)
{
    std::size_t before = out.size();
    Checker c(ctx, out);
    auto t = c.expr(e);
    if (out.size() != before)
        return std::nullopt;
    return t;
}

TypeRef typecheck_expr(const Expr& e, TypeContext& ctx)
{
    std::vector<Diagnostic> diags;
    auto t = infer_type(e, ctx, diags);
    if (!t)
        throw DiagnosticError(Stage::Type, std::move(diags));
    return *t;
}

std::vector<Diagnostic> typecheck_method(const MethodEntry& m, const WovenModel& wm)
{
    std::vector<Diagnostic> out;
    TypeContext ctx;
    ctx.model = &wm;
    ctx.unit = m.unit;
    ctx.self_class = m.defining_class;
    ctx.pure = false;
    ctx.method_class = m.defining_class;
    ctx.method_name = m.original_name.empty() ? m.method->sig.name : m.original_name;
    ctx.return_type = m.method->sig.return_type;
    Checker c(ctx, out);
    for (const auto& p : m.method->sig.params) {
        if (p.name == "self" || !ctx.bind(p.name, p.type))
            c.error(m.method->pos, "DuplicateParameter", "parameter '" + p.name + "' is repeated");
    }
    ctx.push();
    for (const auto& s : m.method->body)
        c.stmt(*s);
    ctx.pop();
    return out;
}

std::vector<Diagnostic> typecheck_behavior(const BehaviorModule& bm, const WovenModel& wm)
{
    std::vector<Diagnostic> out;
    for (const auto& aspect : bm.aspects) {
        const WovenClass* wc = wm.find(aspect.class_name);
        if (!wc) {
            out.push_back({bm.source_unit, aspect.pos, "ResolutionError", "aspect targets unknown class " + aspect.class_name});
            continue;
        }
        for (const auto& m : aspect.methods) {
            auto d = typecheck_method(MethodEntry{wc->name, m, bm.source_unit, m->sig.name}, wm);
            out.insert(out.end(), d.begin(), d.end());
        }
    }
    return out;
}

std::vector<Diagnostic> typecheck_contracts(const ContractModule& cm, const WovenModel& wm)
{
    std::vector<Diagnostic> out;
    for (const auto& c : cm.contributions) {
        const WovenClass* wc = wm.find(c.class_name);
        if (!wc) {
            out.push_back({cm.source_unit, c.pos, "ResolutionError", "aspect targets unknown class " + c.class_name});
            continue;
        }
        auto base_ctx = [&] {
            TypeContext ctx;
            ctx.model = &wm;
            ctx.unit = cm.source_unit;
            ctx.self_class = wc->name;
            return ctx;
        };
        for (const auto& inv : c.invariants) {
            TypeContext ctx = base_ctx();
            Checker(ctx, out).expect_bool(*inv.body, "invariant " + inv.name);
        }
        auto op_cond = [&](const OpCondition& cond, bool post) {
            TypeContext ctx = base_ctx();
            Checker ch(ctx, out);
            const SignatureEntry* sig = wc->signature(cond.op_name);
            if (!sig) {
                ch.error(cond.pos, "ResolutionError",
                         std::string(post ? "postcondition " : "precondition ") + cond.name + " names unknown operation "
                             + wc->name + "." + cond.op_name);
                return;
            }
            for (const auto& p : sig->sig.params)
                ctx.bind(p.name, p.type);
            if (post && !sig->sig.return_type.is_void())
                ctx.bind("result", sig->sig.return_type);
            ch.expect_bool(*cond.body, std::string(post ? "postcondition " : "precondition ") + cond.name);
        };
        for (const auto& p : c.pre_conditions)
            op_cond(p, false);
        for (const auto& p : c.post_conditions)
            op_cond(p, true);
    }
    return out;
}

std::vector<Diagnostic> typecheck_units(const std::vector<LoadedUnit>& units, const WovenModel& wm)
{
    std::vector<Diagnostic> out;
    for (const auto& u : units) {
        std::vector<Diagnostic> d;
        if (u.kind() == UnitKind::Contracts)
            d = typecheck_contracts(std::get<ContractModule>(u.content), wm);
        else if (u.kind() == UnitKind::Behavior)
            d = typecheck_behavior(std::get<BehaviorModule>(u.content), wm);
        out.insert(out.end(), d.begin(), d.end());
    }
    return out;
}

} // namespace mashup
