#include "mashup/interpreter.hpp"

#include "mashup/typecheck.hpp"

#include <algorithm>
#include <sstream>

namespace mashup {

const char* to_string(ContractPolicy p)
{
    switch (p) {
    case ContractPolicy::Off: return "off";
    case ContractPolicy::PrePostOnly: return "prepost";
    case ContractPolicy::Full: return "full";
    }
    return "?";
}

std::optional<ContractPolicy> contract_policy_from_name(std::string_view name)
{
    if (name == "off")
        return ContractPolicy::Off;
    if (name == "prepost")
        return ContractPolicy::PrePostOnly;
    if (name == "full")
        return ContractPolicy::Full;
    return std::nullopt;
}

const char* to_string(TraceEvent::Kind k)
{
    switch (k) {
    case TraceEvent::Kind::OpEnter: return "OpEnter";
    case TraceEvent::Kind::OpExit: return "OpExit";
    case TraceEvent::Kind::ContractViolation: return "ContractViolation";
    case TraceEvent::Kind::NodeExecuted: return "NodeExecuted";
    }
    return "?";
}

std::vector<std::string> Trace::node_labels() const
{
    std::vector<std::string> out;
    for (const auto& e : events)
        if (e.kind == TraceEvent::Kind::NodeExecuted)
            out.push_back(e.detail);
    return out;
}

std::string Trace::str() const
{
    std::string out;
    for (const auto& e : events) {
        out += to_string(e.kind);
        out += '\t';
        out += e.detail;
        out += '\n';
    }
    return out;
}

bool Trace::well_nested() const
{
    std::vector<std::string> stack;
    for (const auto& e : events) {
        if (e.kind == TraceEvent::Kind::OpEnter) {
            stack.push_back(e.detail);
        } else if (e.kind == TraceEvent::Kind::OpExit) {
            if (stack.empty() || e.detail.compare(0, stack.back().size(), stack.back()) != 0)
                return false;
            stack.pop_back();
        }
    }
    return true;
}

namespace {

struct Local {
    Value value;
    TypeRef type;
};

struct Frame {
    std::optional<ObjRef> self;
    const MethodEntry* method = nullptr;
    std::string op;
    std::vector<std::map<std::string, Local>> scopes;
    Value ret;

    Local* lookup(const std::string& name)
    {
        for (auto s = scopes.rbegin(); s != scopes.rend(); ++s) {
            auto it = s->find(name);
            if (it != s->end())
                return &it->second;
        }
        return nullptr;
    }
};

enum class Flow { Next, Return };

Value default_for(const TypeRef& t)
{
    switch (t.kind()) {
    case TypeRef::Kind::Int: return std::int64_t{0};
    case TypeRef::Kind::Bool: return false;
    case TypeRef::Kind::String: return std::string();
    case TypeRef::Kind::Collection: return Collection{t.coll_kind(), {}};
    default: return VoidValue{};
    }
}

std::int64_t wrap_add(std::int64_t a, std::int64_t b)
{
    return static_cast<std::int64_t>(static_cast<std::uint64_t>(a) + static_cast<std::uint64_t>(b));
}
std::int64_t wrap_sub(std::int64_t a, std::int64_t b)
{
    return static_cast<std::int64_t>(static_cast<std::uint64_t>(a) - static_cast<std::uint64_t>(b));
}
std::int64_t wrap_mul(std::int64_t a, std::int64_t b)
{
    return static_cast<std::int64_t>(static_cast<std::uint64_t>(a) * static_cast<std::uint64_t>(b));
}

class Machine {
public:
    Machine(const ModelInstance& view, ModelInstance* model, Trace* trace, RuntimeOptions opts)
        : view_(view), model_(model), trace_(trace), opts_(opts)
    {
    }

    int pure = 0;
    std::vector<Frame> frames;

    // -- display ------------------------------------------------------------

    std::string display(const Value& v) const
    {
        if (v.is_void())
            return "void";
        if (v.is_int())
            return std::to_string(v.as_int());
        if (v.is_bool())
            return v.as_bool() ? "true" : "false";
        if (v.is_string())
            return v.as_string();
        if (v.is_object())
            return "@" + view_.id_of(v.as_object());
        std::string s = "[";
        const auto& items = v.as_collection().items;
        for (std::size_t i = 0; i < items.size(); ++i)
            s += (i ? ", " : "") + display(items[i]);
        return s + "]";
    }

    // -- invocation ---------------------------------------------------------

    Value invoke(ObjRef self, const std::string& op, std::vector<Value> args)
    {
        const WovenClass& wc = view_.class_of(self);
        const MethodEntry* entry = wc.resolve(op);
        if (!entry) {
            if (find_builtin(op))
                return builtin(self, op, args);
            throw Fault(FaultKind::NoSuchMethod, "no method '" + op + "' on " + wc.name + " (object "
                                                     + view_.id_of(self) + ")",
                        op);
        }
        if (pure)
            throw Fault(FaultKind::TypeFault, "cannot call operation '" + op + "' while evaluating a contract", op);
        const auto& sig = entry->method->sig;
        check_arity(sig, args, op);

        const std::string label = view_.id_of(self) + "." + op;
        if (opts_.policy != ContractPolicy::Off)
            check_pre(wc, self, op, sig, args);
        record(TraceEvent::Kind::OpEnter, label, false);
        Value result = run_body(self, *entry, args);
        if (opts_.policy != ContractPolicy::Off)
            check_post(wc, self, op, sig, args, result);
        if (opts_.policy == ContractPolicy::Full)
            check_invariants(self);
        record(TraceEvent::Kind::OpExit, label + " -> " + display(result), false);
        return result;
    }

private:
    void check_arity(const OperationSig& sig, std::vector<Value>& args, const std::string& op)
    {
        if (args.size() != sig.params.size())
            throw Fault(FaultKind::TypeFault, "'" + op + "' expects " + std::to_string(sig.params.size())
                                                  + " argument(s), got " + std::to_string(args.size()),
                        op);
        for (std::size_t i = 0; i < args.size(); ++i)
            args[i] = coerce(sig.params[i].type, std::move(args[i]), "argument '" + sig.params[i].name + "'");
    }

    void record(TraceEvent::Kind kind, std::string detail, bool always)
    {
        if (trace_ && (always || opts_.record_calls))
            trace_->events.push_back({kind, std::move(detail)});
    }

    Value builtin(ObjRef self, const std::string& op, const std::vector<Value>& args)
    {
        if (op == "container") {
            if (!args.empty())
                throw Fault(FaultKind::TypeFault, "container() takes no arguments", op);
            auto c = view_.container_of(self);
            return c ? Value(*c) : Value(VoidValue{});
        }
        if (op == "trace") {
            if (pure)
                throw Fault(FaultKind::TypeFault, "trace() is not allowed while evaluating a contract", op);
            if (args.size() != 1)
                throw Fault(FaultKind::TypeFault, "trace() takes one argument", op);
            record(TraceEvent::Kind::NodeExecuted, display(args[0]), true);
            return VoidValue{};
        }
        throw Fault(FaultKind::NoSuchMethod, "unknown builtin '" + op + "'", op);
    }

    Value coerce(const TypeRef& t, Value v, const std::string& what) const
    {
        auto bad = [&]() -> Value {
            throw Fault(FaultKind::TypeFault, what + " expects " + t.str() + ", got " + display(v));
        };
        switch (t.kind()) {
        case TypeRef::Kind::Int: return v.is_int() ? v : bad();
        case TypeRef::Kind::Bool: return v.is_bool() ? v : bad();
        case TypeRef::Kind::String: return v.is_string() ? v : bad();
        case TypeRef::Kind::Class:
            if (v.is_void())
                return v;
            if (!v.is_object() || !view_.class_of(v.as_object()).is_kind_of(t.class_name()))
                return bad();
            return v;
        case TypeRef::Kind::Collection:
            if (v.is_void())
                return Collection{t.coll_kind(), {}};
            if (!v.is_collection())
                return bad();
            if (v.as_collection().kind == t.coll_kind())
                return v;
            return make_collection(t.coll_kind(), std::move(v.as_collection().items));
        default: return v;
        }
    }

    struct FrameGuard {
        std::vector<Frame>& frames;
        ~FrameGuard() { frames.pop_back(); }
    };

    Value run_body(ObjRef self, const MethodEntry& entry, const std::vector<Value>& args)
    {
        if (frames.size() >= opts_.max_depth)
            throw Fault(FaultKind::Raised, "call depth limit of " + std::to_string(opts_.max_depth) + " exceeded");
        const auto& sig = entry.method->sig;
        Frame f;
        f.self = self;
        f.method = &entry;
        f.op = entry.original_name.empty() ? sig.name : entry.original_name;
        f.scopes.emplace_back();
        for (std::size_t i = 0; i < sig.params.size(); ++i)
            f.scopes.back()[sig.params[i].name] = Local{args[i], sig.params[i].type};
        frames.push_back(std::move(f));
        FrameGuard guard{frames};
        exec_block(entry.method->body);
        Value r = std::move(frames.back().ret);
        if (sig.return_type.is_void())
            return VoidValue{};
        return coerce(sig.return_type, std::move(r), "result of '" + sig.name + "'");
    }

    // Contracts are evaluated purely, in a frame with self, parameters and,
    // for postconditions, `result`.
    bool eval_condition(ObjRef self, const ExprPtr& body, const OperationSig* sig, const std::vector<Value>* args,
                        const Value* result)
    {
        Frame f;
        f.self = self;
        f.scopes.emplace_back();
        if (sig && args)
            for (std::size_t i = 0; i < sig->params.size(); ++i)
                f.scopes.back()[sig->params[i].name] = Local{(*args)[i], sig->params[i].type};
        if (result && sig && !sig->return_type.is_void())
            f.scopes.back()["result"] = Local{*result, sig->return_type};
        frames.push_back(std::move(f));
        FrameGuard guard{frames};
        ++pure;
        struct PureGuard {
            int& p;
            ~PureGuard() { --p; }
        } pg{pure};
        Value v = eval(*body);
        if (!v.is_bool())
            throw Fault(FaultKind::TypeFault, "contract clause did not evaluate to a Boolean");
        return v.as_bool();
    }

    void violation(FaultKind kind, const char* tag, const std::string& name, ObjRef self, const std::string& op)
    {
        std::string detail = std::string(tag) + " " + name + " @ " + view_.id_of(self);
        record(TraceEvent::Kind::ContractViolation, detail, true);
        std::string what = std::string(tag) + " '" + name + "' violated on " + view_.id_of(self)
                         + (op.empty() ? "" : " in " + op);
        throw Fault(kind, what, name);
    }

    void check_pre(const WovenClass& wc, ObjRef self, const std::string& op, const OperationSig& sig,
                   const std::vector<Value>& args)
    {
        auto it = wc.flat_pre.find(op);
        if (it == wc.flat_pre.end() || it->second.empty())
            return;
        std::string first_failed;
        for (const auto& group : it->second) {
            bool all = true;
            for (const auto& clause : group.clauses) {
                if (!eval_condition(self, clause.body, &sig, &args, nullptr)) {
                    if (first_failed.empty())
                        first_failed = clause.name;
                    all = false;
                    break;
                }
            }
            if (all)
                return;
        }
        violation(FaultKind::PreconditionViolation, "pre", first_failed, self, op);
    }

    void check_post(const WovenClass& wc, ObjRef self, const std::string& op, const OperationSig& sig,
                    const std::vector<Value>& args, const Value& result)
    {
        auto it = wc.flat_post.find(op);
        if (it == wc.flat_post.end())
            return;
        for (const auto& group : it->second)
            for (const auto& clause : group.clauses)
                if (!eval_condition(self, clause.body, &sig, &args, &result))
                    violation(FaultKind::PostconditionViolation, "post", clause.name, self, op);
    }

public:
    void check_invariants(ObjRef self)
    {
        for (const auto& inv : view_.class_of(self).flat_invariants)
            if (!eval_condition(self, inv.inv.body, nullptr, nullptr, nullptr))
                violation(FaultKind::InvariantViolation, "inv", inv.inv.name, self, {});
    }

    // -- statements ---------------------------------------------------------

    Flow exec_block(const Block& b)
    {
        Frame& f = frames.back();
        f.scopes.emplace_back();
        struct ScopeGuard {
            std::vector<Frame>& frames;
            std::size_t depth;
            ~ScopeGuard() { frames[depth].scopes.pop_back(); }
        } guard{frames, frames.size() - 1};
        for (const auto& s : b)
            if (exec(*s) == Flow::Return)
                return Flow::Return;
        return Flow::Next;
    }

    Flow exec(const Stmt& s)
    {
        return std::visit([&](const auto& n) { return exec_node(s, n); }, s.node);
    }

    bool condition(const Expr& e)
    {
        Value v = eval(e);
        if (!v.is_bool())
            throw Fault(FaultKind::TypeFault, "condition evaluated to " + display(v) + ", not a Boolean");
        return v.as_bool();
    }

    Flow exec_node(const Stmt&, const VarDecl& v)
    {
        Value init = v.init ? coerce(v.type, eval(*v.init), "variable '" + v.name + "'") : default_for(v.type);
        frames.back().scopes.back()[v.name] = Local{std::move(init), v.type};
        return Flow::Next;
    }

    Flow exec_node(const Stmt&, const Assign& a)
    {
        Value value = eval(*a.value);
        if (const VarRef* var = a.target->as<VarRef>()) {
            Local* l = frames.back().lookup(var->name);
            if (!l)
                throw Fault(FaultKind::UnboundVariable, "unknown variable '" + var->name + "'", var->name);
            l->value = coerce(l->type, std::move(value), "variable '" + var->name + "'");
            return Flow::Next;
        }
        const FeatureNav& nav = *a.target->as<FeatureNav>();
        Value recv = eval(*nav.receiver);
        if (recv.is_void())
            throw Fault(FaultKind::VoidInvocation, "cannot assign '" + nav.feature + "' on void", nav.feature);
        if (!recv.is_object())
            throw Fault(FaultKind::TypeFault, "cannot assign '" + nav.feature + "' on " + display(recv), nav.feature);
        mutable_model().set(recv.as_object(), nav.feature, std::move(value));
        return Flow::Next;
    }

    Flow exec_node(const Stmt&, const ExprStmt& e)
    {
        eval(*e.expr);
        return Flow::Next;
    }

    Flow exec_node(const Stmt&, const IfStmt& i)
    {
        return exec_block(condition(*i.cond) ? i.then_block : i.else_block);
    }

    Flow exec_node(const Stmt&, const LoopStmt& l)
    {
        Frame& f = frames.back();
        f.scopes.emplace_back();
        struct ScopeGuard {
            std::vector<Frame>& frames;
            std::size_t depth;
            ~ScopeGuard() { frames[depth].scopes.pop_back(); }
        } guard{frames, frames.size() - 1};
        for (const auto& s : l.init)
            if (exec(*s) == Flow::Return)
                return Flow::Return;
        while (!condition(*l.until))
            if (exec_block(l.body) == Flow::Return)
                return Flow::Return;
        return Flow::Next;
    }

    Flow exec_node(const Stmt&, const EachLoop& l)
    {
        Value recv = eval(*l.receiver);
        if (recv.is_void())
            return Flow::Next;
        if (!recv.is_collection())
            throw Fault(FaultKind::TypeFault, "'each' over " + display(recv) + ", not a collection");
        const auto items = recv.as_collection().items;
        for (const auto& item : items) {
            Frame& f = frames.back();
            f.scopes.emplace_back();
            f.scopes.back()[l.param] = Local{item, TypeRef::null_type()};
            struct ScopeGuard {
                std::vector<Frame>& frames;
                std::size_t depth;
                ~ScopeGuard() { frames[depth].scopes.pop_back(); }
            } guard{frames, frames.size() - 1};
            for (const auto& s : l.body)
                if (exec(*s) == Flow::Return)
                    return Flow::Return;
        }
        return Flow::Next;
    }

    Flow exec_node(const Stmt&, const ReturnStmt& r)
    {
        frames.back().ret = r.value ? eval(*r.value) : Value(VoidValue{});
        return Flow::Return;
    }

    Flow exec_node(const Stmt&, const RaiseStmt& r)
    {
        throw Fault(FaultKind::Raised, display(eval(*r.message)));
    }

    // -- expressions --------------------------------------------------------

    ModelInstance& mutable_model()
    {
        if (pure || !model_)
            throw Fault(FaultKind::TypeFault, "the model cannot be modified while evaluating a contract or query");
        return *model_;
    }

    ObjRef current_self(const char* what)
    {
        if (frames.empty() || !frames.back().self)
            throw Fault(FaultKind::UnboundVariable, std::string(what) + " is not bound", "self");
        return *frames.back().self;
    }

    Value eval(const Expr& e)
    {
        return std::visit([&](const auto& n) { return node(e, n); }, e.node);
    }

    Value node(const Expr&, const SelfRef&) { return current_self("'self'"); }

    Value node(const Expr&, const VarRef& v)
    {
        if (!frames.empty())
            if (Local* l = frames.back().lookup(v.name))
                return l->value;
        throw Fault(FaultKind::UnboundVariable, "unknown variable '" + v.name + "'", v.name);
    }

    Value node(const Expr&, const IntLit& l) { return l.value; }
    Value node(const Expr&, const BoolLit& l) { return l.value; }
    Value node(const Expr&, const StringLit& l) { return l.value; }
    Value node(const Expr&, const VoidLit&) { return VoidValue{}; }

    Value node(const Expr&, const FeatureNav& f)
    {
        Value r = eval(*f.receiver);
        if (r.is_void())
            return r;
        if (!r.is_object())
            throw Fault(FaultKind::TypeFault, "cannot navigate '" + f.feature + "' on " + display(r), f.feature);
        return view_.get(r.as_object(), f.feature);
    }

    std::vector<Value> eval_args(const std::vector<ExprPtr>& args)
    {
        std::vector<Value> out;
        out.reserve(args.size());
        for (const auto& a : args)
            out.push_back(eval(*a));
        return out;
    }

    Value call(const Value& recv, const std::string& op, std::vector<Value> args)
    {
        if (recv.is_void())
            throw Fault(FaultKind::VoidInvocation, "cannot invoke '" + op + "' on void", op);
        if (!recv.is_object())
            throw Fault(FaultKind::TypeFault, "cannot invoke '" + op + "' on " + display(recv), op);
        return invoke(recv.as_object(), op, std::move(args));
    }

    Value node(const Expr&, const OpCall& c)
    {
        Value recv = c.receiver ? eval(*c.receiver) : Value(current_self("implicit 'self'"));
        return call(recv, c.op, eval_args(c.args));
    }

    Value node(const Expr&, const CollectionOp& c)
    {
        Value recv = eval(*c.receiver);
        if (recv.is_object() && !c.lambda)
            return call(recv, to_string(c.kind), eval_args(c.args));
        if (recv.is_void())
            recv = Collection{CollKind::Sequence, {}};
        if (!recv.is_collection())
            throw Fault(FaultKind::TypeFault,
                        std::string("'") + to_string(c.kind) + "' needs a collection, got " + display(recv));
        const Collection& coll = recv.as_collection();

        if (c.lambda) {
            Frame& f = frames.empty() ? frames.emplace_back() : frames.back();
            f.scopes.emplace_back();
            struct ScopeGuard {
                std::vector<Frame>& frames;
                std::size_t depth;
                ~ScopeGuard() { frames[depth].scopes.pop_back(); }
            } guard{frames, frames.size() - 1};
            auto apply = [&](const Value& item) {
                frames.back().scopes.back()[c.lambda->param] = Local{item, TypeRef::null_type()};
                return eval(*c.lambda->body);
            };
            auto test = [&](const Value& item) {
                Value v = apply(item);
                if (!v.is_bool())
                    throw Fault(FaultKind::TypeFault, std::string(to_string(c.kind)) + " body is not Boolean");
                return v.as_bool();
            };
            switch (c.kind) {
            case CollOpKind::Collect: {
                Collection out{CollKind::Sequence, {}};
                for (const auto& i : coll.items)
                    out.items.push_back(apply(i));
                return out;
            }
            case CollOpKind::Select:
            case CollOpKind::Reject: {
                bool keep = c.kind == CollOpKind::Select;
                Collection out{coll.kind, {}};
                for (const auto& i : coll.items)
                    if (test(i) == keep)
                        out.items.push_back(i);
                return out;
            }
            case CollOpKind::ForAll:
                for (const auto& i : coll.items)
                    if (!test(i))
                        return false;
                return true;
            case CollOpKind::Exists:
                for (const auto& i : coll.items)
                    if (test(i))
                        return true;
                return false;
            case CollOpKind::Each:
                for (const auto& i : coll.items)
                    apply(i);
                return VoidValue{};
            default: break;
            }
            throw Fault(FaultKind::TypeFault, std::string(to_string(c.kind)) + " does not take a lambda");
        }

        auto arg = [&]() {
            if (c.args.size() != 1)
                throw Fault(FaultKind::TypeFault, std::string(to_string(c.kind)) + " takes one argument");
            return eval(*c.args.front());
        };
        switch (c.kind) {
        case CollOpKind::IsEmpty: return coll.items.empty();
        case CollOpKind::NotEmpty: return !coll.items.empty();
        case CollOpKind::Size: return static_cast<std::int64_t>(coll.items.size());
        case CollOpKind::First: return coll.items.empty() ? Value(VoidValue{}) : coll.items.front();
        case CollOpKind::Includes: return coll.contains(arg());
        case CollOpKind::Intersection: {
            Value other = arg();
            if (other.is_void())
                return Collection{coll.kind, {}};
            if (!other.is_collection())
                throw Fault(FaultKind::TypeFault, "intersection needs a collection argument");
            Collection out{coll.kind, {}};
            for (const auto& i : coll.items)
                if (other.as_collection().contains(i))
                    out.items.push_back(i);
            return out;
        }
        case CollOpKind::InSchedulingOrder: {
            Collection out{CollKind::Sequence, coll.items};
            bool objects = std::all_of(out.items.begin(), out.items.end(), [](const Value& v) { return v.is_object(); });
            if (objects) {
                bool desc = opts_.tiebreak == TieBreak::Descending;
                std::stable_sort(out.items.begin(), out.items.end(), [&](const Value& a, const Value& b) {
                    const auto& ia = view_.id_of(a.as_object());
                    const auto& ib = view_.id_of(b.as_object());
                    return desc ? ib < ia : ia < ib;
                });
            }
            return out;
        }
        case CollOpKind::Add:
        case CollOpKind::Remove: {
            Value v = arg();
            bool add = c.kind == CollOpKind::Add;
            if (const FeatureNav* nav = c.receiver->as<FeatureNav>()) {
                Value owner = eval(*nav->receiver);
                if (!owner.is_object())
                    throw Fault(FaultKind::VoidInvocation, std::string(to_string(c.kind)) + " on '" + nav->feature
                                                               + "' of " + display(owner));
                if (add)
                    mutable_model().add(owner.as_object(), nav->feature, std::move(v));
                else
                    mutable_model().remove(owner.as_object(), nav->feature, v);
                return VoidValue{};
            }
            if (const VarRef* var = c.receiver->as<VarRef>()) {
                if (pure)
                    throw Fault(FaultKind::TypeFault, "collections cannot be modified while evaluating a contract");
                Local* l = frames.back().lookup(var->name);
                if (!l->value.is_collection())
                    l->value = Collection{l->type.is_collection() ? l->type.coll_kind() : CollKind::Sequence, {}};
                if (add)
                    l->value.as_collection().insert(std::move(v));
                else
                    l->value.as_collection().erase(v);
                return VoidValue{};
            }
            throw Fault(FaultKind::TypeFault, std::string(to_string(c.kind)) + " needs a feature or variable receiver");
        }
        default: break;
        }
        throw Fault(FaultKind::TypeFault, std::string(to_string(c.kind)) + " requires a lambda");
    }

    Value node(const Expr&, const TypeTest& t)
    {
        Value r = eval(*t.receiver);
        if (t.kind == TypeTestKind::OclIsKindOf) {
            if (!r.is_object())
                return false;
            return view_.class_of(r.as_object()).is_kind_of(t.target);
        }
        if (r.is_void())
            return r;
        if (!r.is_object() || !view_.class_of(r.as_object()).is_kind_of(t.target))
            throw Fault(FaultKind::TypeFault, "asType(" + t.target + ") on " + display(r)
                                                  + (r.is_object() ? " of class " + view_.class_of(r.as_object()).name
                                                                   : std::string()));
        return r;
    }

    Value node(const Expr&, const BinOp& b)
    {
        if (b.op == BinOpKind::And || b.op == BinOpKind::Or) {
            Value l = eval(*b.lhs);
            if (!l.is_bool())
                throw Fault(FaultKind::TypeFault, std::string(to_string(b.op)) + " on " + display(l));
            if (l.as_bool() == (b.op == BinOpKind::Or))
                return l;
            Value r = eval(*b.rhs);
            if (!r.is_bool())
                throw Fault(FaultKind::TypeFault, std::string(to_string(b.op)) + " on " + display(r));
            return r;
        }
        Value l = eval(*b.lhs);
        Value r = eval(*b.rhs);
        auto bad = [&]() -> Value {
            throw Fault(FaultKind::TypeFault,
                        std::string("operator '") + to_string(b.op) + "' on " + display(l) + " and " + display(r));
        };
        switch (b.op) {
        case BinOpKind::Eq: return l == r;
        case BinOpKind::Ne: return !(l == r);
        case BinOpKind::Add:
            if (l.is_int() && r.is_int())
                return wrap_add(l.as_int(), r.as_int());
            if ((l.is_string() || r.is_string()) && !l.is_collection() && !r.is_collection() && !l.is_object()
                && !r.is_object() && !l.is_void() && !r.is_void())
                return display(l) + display(r);
            return bad();
        case BinOpKind::Sub:
            if (l.is_int() && r.is_int())
                return wrap_sub(l.as_int(), r.as_int());
            return bad();
        case BinOpKind::Mul:
            if (l.is_int() && r.is_int())
                return wrap_mul(l.as_int(), r.as_int());
            return bad();
        case BinOpKind::Div:
            if (!l.is_int() || !r.is_int())
                return bad();
            if (r.as_int() == 0)
                throw Fault(FaultKind::DivisionByZero, "division by zero");
            if (r.as_int() == -1)
                return wrap_sub(0, l.as_int());
            return l.as_int() / r.as_int();
        case BinOpKind::Lt:
        case BinOpKind::Le:
        case BinOpKind::Gt:
        case BinOpKind::Ge: {
            int cmp;
            if (l.is_int() && r.is_int())
                cmp = l.as_int() < r.as_int() ? -1 : (l.as_int() > r.as_int() ? 1 : 0);
            else if (l.is_string() && r.is_string())
                cmp = l.as_string().compare(r.as_string());
            else
                return bad();
            switch (b.op) {
            case BinOpKind::Lt: return cmp < 0;
            case BinOpKind::Le: return cmp <= 0;
            case BinOpKind::Gt: return cmp > 0;
            default: return cmp >= 0;
            }
        }
        default: return bad();
        }
    }

    Value node(const Expr&, const Not& n)
    {
        Value v = eval(*n.operand);
        if (!v.is_bool())
            throw Fault(FaultKind::TypeFault, "'not' on " + display(v));
        return !v.as_bool();
    }

    Value node(const Expr&, const Neg& n)
    {
        Value v = eval(*n.operand);
        if (!v.is_int())
            throw Fault(FaultKind::TypeFault, "unary '-' on " + display(v));
        return wrap_sub(0, v.as_int());
    }

    Value node(const Expr&, const IfExpr& i)
    {
        return condition(*i.cond) ? eval(*i.then_branch) : eval(*i.else_branch);
    }

    Value node(const Expr&, const New& n) { return mutable_model().create(n.class_name); }

    Value node(const Expr&, const SuperCall& s)
    {
        if (frames.empty() || !frames.back().method)
            throw Fault(FaultKind::NoSuchMethod, "'super' outside a method");
        const Frame& f = frames.back();
        ObjRef self = *f.self;
        const std::string op = f.op;
        const std::string& current = f.method->defining_class;
        const WovenModel& wm = view_.woven();

        auto own = [&](const std::string& cls) -> const MethodEntry* {
            const WovenClass* kc = wm.find(cls);
            if (!kc)
                return nullptr;
            for (const auto& m : kc->own_methods)
                if (m.method->sig.name == op)
                    return &m;
            return nullptr;
        };
        auto first_in = [&](const std::vector<std::string>& lin, std::size_t from) -> const MethodEntry* {
            for (std::size_t i = from; i < lin.size(); ++i)
                if (auto m = own(lin[i]))
                    return m;
            return nullptr;
        };

        const MethodEntry* target = nullptr;
        if (s.qualifier) {
            const WovenClass* q = wm.find(*s.qualifier);
            if (q)
                target = first_in(q->linearization, 0);
        } else {
            const WovenClass& dyn = view_.class_of(self);
            auto it = dyn.method_table.find(op);
            if (it != dyn.method_table.end()) {
                const auto& entries = it->second;
                for (std::size_t i = 0; i < entries.size(); ++i)
                    if (entries[i].defining_class == current) {
                        if (i + 1 < entries.size())
                            target = &entries[i + 1];
                        break;
                    }
            }
            if (!target) {
                // The current body was renamed away from this table.
                if (const WovenClass* cur = wm.find(current))
                    target = first_in(cur->linearization, 1);
            }
        }
        if (!target)
            throw Fault(FaultKind::NoSuchMethod, "no inherited '" + op + "' above " + current, op);

        std::vector<Value> args = eval_args(s.args);
        check_arity(target->method->sig, args, op);
        const std::string label = view_.id_of(self) + "." + op + " super " + target->defining_class;
        record(TraceEvent::Kind::OpEnter, label, false);
        Value result = run_body(self, *target, args);
        record(TraceEvent::Kind::OpExit, label + " -> " + display(result), false);
        return result;
    }

    const ModelInstance& view_;
    ModelInstance* model_;
    Trace* trace_;
    RuntimeOptions opts_;
};

} // namespace

Value eval_expr(const Expr& e, const Environment& env)
{
    if (!env.model)
        throw std::invalid_argument("eval_expr needs a model");
    RuntimeOptions opts;
    opts.tiebreak = env.tiebreak;
    Machine m(*env.model, nullptr, nullptr, opts);
    m.pure = 1;
    Frame f;
    f.self = env.self;
    f.scopes.emplace_back();
    for (const auto& [k, v] : env.locals)
        f.scopes.back()[k] = Local{v, TypeRef::null_type()};
    m.frames.push_back(std::move(f));
    return m.eval(e);
}

struct Interpreter::Impl {
    ModelInstance& model;
    RuntimeOptions options;
    Trace trace;
    Machine machine;

    Impl(ModelInstance& m, RuntimeOptions o) : model(m), options(o), machine(m, &m, &trace, o) {}
};

Interpreter::Interpreter(ModelInstance& model, RuntimeOptions options) : impl_(new Impl(model, options)) {}

Interpreter::~Interpreter()
{
    delete impl_;
}

Value Interpreter::invoke(ObjRef self, std::string_view op, std::vector<Value> args)
{
    return impl_->machine.invoke(self, std::string(op), std::move(args));
}

const Trace& Interpreter::trace() const
{
    return impl_->trace;
}

Trace Interpreter::take_trace()
{
    Trace t = std::move(impl_->trace);
    impl_->trace = {};
    return t;
}

ModelInstance& Interpreter::model()
{
    return impl_->model;
}

const RuntimeOptions& Interpreter::options() const
{
    return impl_->options;
}

CheckResult check_invariant(const FlatInvariant& inv, ObjRef obj, const ModelInstance& model)
{
    CheckResult r;
    r.invariant = inv.inv.name;
    r.owner = inv.owner;
    r.object = obj;
    r.object_id = model.id_of(obj);
    try {
        Environment env;
        env.model = &model;
        env.self = obj;
        Value v = eval_expr(*inv.inv.body, env);
        if (!v.is_bool()) {
            r.status = CheckResult::Status::Error;
            r.message = "invariant did not evaluate to a Boolean";
        } else if (!v.as_bool()) {
            r.status = CheckResult::Status::Violated;
        }
    } catch (const Fault& f) {
        r.status = CheckResult::Status::Error;
        r.message = std::string(to_string(f.kind())) + ": " + f.what();
    }
    return r;
}

std::vector<CheckResult> check_model(const ModelInstance& model)
{
    std::vector<ObjRef> objs = model.all();
    std::sort(objs.begin(), objs.end(), [&](ObjRef a, ObjRef b) { return model.id_of(a) < model.id_of(b); });
    std::vector<CheckResult> out;
    for (ObjRef o : objs)
        for (const auto& inv : model.class_of(o).flat_invariants)
            out.push_back(check_invariant(inv, o, model));
    return out;
}

} // namespace mashup
