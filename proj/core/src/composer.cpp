#include "mashup/composer.hpp"

#include "parser.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <sstream>

namespace mashup {

// ---------------------------------------------------------------------------
// Manifests and unit loading

MashupManifest parse_manifest(std::string_view text, const std::string& unit)
{
    detail::Parser p(text, unit);
    MashupManifest m;
    m.source_unit = unit;
    p.expect_keyword("package");
    m.package_name = p.expect_ident("package name").text;
    p.accept_punct(";");
    while (!p.at_end()) {
        if (p.accept_keyword("require")) {
            m.imports.push_back(p.expect_string("unit path").text);
        } else if (p.accept_keyword("main")) {
            if (m.main)
                p.fail("duplicate 'main' entry point");
            EntryPoint e;
            e.class_name = p.expect_ident("class name").text;
            p.expect_punct(".");
            e.op_name = p.expect_ident("operation name").text;
            m.main = e;
        } else {
            p.fail("expected 'require' or 'main'");
        }
        p.accept_punct(";");
    }
    return m;
}

const char* role_of(UnitKind kind)
{
    switch (kind) {
    case UnitKind::Metamodel: return "metamodel";
    case UnitKind::Contracts: return "constraints";
    case UnitKind::Behavior: return "behavior";
    }
    return "?";
}

std::optional<UnitKind> unit_kind_for(std::string_view path)
{
    auto ext = std::filesystem::path(path).extension().string();
    if (ext == ".mm")
        return UnitKind::Metamodel;
    if (ext == ".inv" || ext == ".ocl")
        return UnitKind::Contracts;
    if (ext == ".act" || ext == ".kmt")
        return UnitKind::Behavior;
    return std::nullopt;
}

std::optional<std::string> FileUnitLoader::read(const std::string& name)
{
    auto path = base_ / name;
    std::error_code ec;
    if (!std::filesystem::is_regular_file(path, ec))
        return std::nullopt;
    std::ifstream in(path, std::ios::binary);
    if (!in)
        return std::nullopt;
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::optional<std::string> MemoryUnitLoader::read(const std::string& name)
{
    ++reads_;
    auto it = files_.find(name);
    if (it == files_.end())
        return std::nullopt;
    return it->second;
}

namespace {

const std::vector<std::string>& requires_of(const LoadedUnit& u)
{
    switch (u.kind()) {
    case UnitKind::Contracts: return std::get<ContractModule>(u.content).imports;
    case UnitKind::Behavior: return std::get<BehaviorModule>(u.content).imports;
    default: break;
    }
    static const std::vector<std::string> none;
    return none;
}

std::string join_unit(const std::string& requirer, const std::string& path)
{
    auto dir = std::filesystem::path(requirer).parent_path();
    return (dir / path).lexically_normal().generic_string();
}

} // namespace

std::vector<LoadedUnit> resolve_requires(const MashupManifest& manifest, UnitLoader& loader)
{
    std::vector<LoadedUnit> out;
    std::set<std::string> seen;

    std::function<void(const std::string&, const std::string&, SourcePos)> load =
        [&](const std::string& name, const std::string& requirer, SourcePos) {
            if (!seen.insert(name).second)
                return;
            auto kind = unit_kind_for(name);
            if (!kind)
                throw DiagnosticError(Stage::Parse, {Diagnostic{requirer, {}, "UnknownUnitKind",
                                                                "cannot tell the concern of unit '" + name
                                                                    + "' (expected .mm, .inv or .act)"}});
            auto text = loader.read(name);
            if (!text)
                throw DiagnosticError(Stage::Parse,
                                      {Diagnostic{requirer, {}, "UnitNotFound", "cannot read unit '" + name + "'"}});
            LoadedUnit u{name, Metamodel{}};
            switch (*kind) {
            case UnitKind::Metamodel: u.content = parse_metamodel(*text, name); break;
            case UnitKind::Contracts: u.content = parse_contracts(*text, name); break;
            case UnitKind::Behavior: u.content = parse_behavior(*text, name); break;
            }
            for (const auto& r : requires_of(u))
                load(join_unit(name, r), name, {});
            out.push_back(std::move(u));
        };

    for (const auto& r : manifest.imports)
        load(std::filesystem::path(r).lexically_normal().generic_string(), manifest.source_unit, {});
    return out;
}

// ---------------------------------------------------------------------------
// Composition cases and contributions

const char* to_string(CompositionCase c)
{
    switch (c) {
    case CompositionCase::KmtKmt: return "KmtKmt";
    case CompositionCase::EcoreEcore: return "EcoreEcore";
    case CompositionCase::EcoreKmt: return "EcoreKmt";
    }
    return "?";
}

CompositionCase classify_pair(const ClassDefinition& a, const ClassDefinition& b)
{
    bool a_base = a.origin == ClassOrigin::BaseMetamodel;
    bool b_base = b.origin == ClassOrigin::BaseMetamodel;
    if (a_base && b_base)
        return CompositionCase::EcoreEcore;
    if (!a_base && !b_base)
        return CompositionCase::KmtKmt;
    return CompositionCase::EcoreKmt;
}

namespace {

bool same_condition(const NamedCondition& a, const NamedCondition& b)
{
    return a.name == b.name && same_expr(*a.body, *b.body);
}

bool same_condition(const OpCondition& a, const OpCondition& b)
{
    return a.op_name == b.op_name && a.name == b.name && same_expr(*a.body, *b.body);
}

template <typename T>
bool same_conditions(const std::vector<T>& a, const std::vector<T>& b)
{
    if (a.size() != b.size())
        return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (!same_condition(a[i], b[i]))
            return false;
    return true;
}

struct KeyedMember {
    std::string key;
    std::string label;
    SourcePos pos;
};

std::vector<KeyedMember> member_keys(const Contribution& c)
{
    std::vector<KeyedMember> keys;
    for (const auto& a : c.attributes)
        keys.push_back({"feature:" + a.name, "feature " + a.name, a.pos});
    for (const auto& r : c.references)
        keys.push_back({"feature:" + r.name, "feature " + r.name, r.pos});
    for (const auto& m : c.methods)
        keys.push_back({"method:" + m->sig.name, "operation " + m->sig.name, m->pos});
    for (const auto& r : c.renamings)
        keys.push_back({"method:" + r.new_name, "operation " + r.new_name, r.pos});
    for (const auto& i : c.invariants)
        keys.push_back({"inv:" + i.name, "invariant " + i.name, i.pos});
    for (const auto& p : c.pre_conditions)
        keys.push_back({"pre:" + p.op_name + ":" + p.name, "precondition " + p.name + " on " + p.op_name, p.pos});
    for (const auto& p : c.post_conditions)
        keys.push_back({"post:" + p.op_name + ":" + p.name, "postcondition " + p.name + " on " + p.op_name, p.pos});
    return keys;
}

// Fills provenance for a single-unit contribution, rejecting duplicates.
void stamp(Contribution& c, const std::string& unit)
{
    std::vector<Diagnostic> diags;
    for (const auto& k : member_keys(c)) {
        if (!c.provenance.emplace(k.key, unit).second)
            diags.push_back({unit, k.pos, "FeatureClash",
                             k.label + " of class " + c.class_name + " is declared twice in " + unit});
    }
    if (!diags.empty())
        throw DiagnosticError(Stage::Composition, std::move(diags));
}

} // namespace

bool operator==(const Contribution& a, const Contribution& b)
{
    return a.class_name == b.class_name && a.units == b.units && a.added_supertypes == b.added_supertypes
        && a.attributes == b.attributes && a.references == b.references && a.methods == b.methods
        && a.renamings == b.renamings && same_conditions(a.invariants, b.invariants)
        && same_conditions(a.pre_conditions, b.pre_conditions)
        && same_conditions(a.post_conditions, b.post_conditions) && a.provenance == b.provenance;
}

Contribution contribution_of(const AspectClass& aspect, const std::string& unit)
{
    Contribution c;
    c.class_name = aspect.class_name;
    c.units = {unit};
    for (const auto& s : aspect.added_supertypes)
        if (std::find(c.added_supertypes.begin(), c.added_supertypes.end(), s) == c.added_supertypes.end())
            c.added_supertypes.push_back(s);
    c.attributes = aspect.added_attributes;
    c.references = aspect.added_references;
    c.methods = aspect.methods;
    c.renamings = aspect.renamings;
    stamp(c, unit);
    return c;
}

Contribution contribution_of(const ContractContribution& contracts, const std::string& unit)
{
    Contribution c;
    c.class_name = contracts.class_name;
    c.units = {unit};
    c.invariants = contracts.invariants;
    c.pre_conditions = contracts.pre_conditions;
    c.post_conditions = contracts.post_conditions;
    stamp(c, unit);
    return c;
}

Contribution merge(const Contribution& a, const Contribution& b)
{
    Contribution r = a;
    std::vector<Diagnostic> diags;
    for (const auto& k : member_keys(b)) {
        auto it = a.provenance.find(k.key);
        if (it != a.provenance.end()) {
            std::string other = b.provenance.count(k.key) ? b.provenance.at(k.key) : std::string("?");
            diags.push_back({other, k.pos, "FeatureClash",
                             k.label + " of class " + a.class_name + " is contributed by both " + it->second
                                 + " and " + other});
        }
    }
    if (!diags.empty())
        throw DiagnosticError(Stage::Composition, std::move(diags));

    for (const auto& u : b.units)
        if (std::find(r.units.begin(), r.units.end(), u) == r.units.end())
            r.units.push_back(u);
    for (const auto& s : b.added_supertypes)
        if (std::find(r.added_supertypes.begin(), r.added_supertypes.end(), s) == r.added_supertypes.end())
            r.added_supertypes.push_back(s);
    auto append = [](auto& dst, const auto& src) { dst.insert(dst.end(), src.begin(), src.end()); };
    append(r.attributes, b.attributes);
    append(r.references, b.references);
    append(r.methods, b.methods);
    append(r.renamings, b.renamings);
    append(r.invariants, b.invariants);
    append(r.pre_conditions, b.pre_conditions);
    append(r.post_conditions, b.post_conditions);
    r.provenance.insert(b.provenance.begin(), b.provenance.end());
    return r;
}

// ---------------------------------------------------------------------------
// Linearization

namespace {

class Linearizer {
public:
    explicit Linearizer(const SupertypeGraph& g) : graph_(g) {}

    const std::vector<std::string>& run(std::string_view cls)
    {
        if (auto it = memo_.find(cls); it != memo_.end())
            return it->second;
        std::string name(cls);
        if (cls == kRootClass)
            return memo_[name] = {name};
        auto node = graph_.find(cls);
        if (node == graph_.end())
            throw DiagnosticError(Stage::Composition,
                                  {Diagnostic{{}, {}, "ResolutionError", "unknown class '" + name + "'"}});
        if (std::find(active_.begin(), active_.end(), name) != active_.end()) {
            std::string cycle;
            bool on = false;
            for (const auto& a : active_) {
                on = on || a == name;
                if (on)
                    cycle += a + " -> ";
            }
            throw DiagnosticError(Stage::Composition,
                                  {Diagnostic{{}, {}, "CycleError", "supertype cycle: " + cycle + name}});
        }
        active_.push_back(name);
        std::vector<std::string> seq;
        const auto& supers = node->second;
        for (auto s = supers.rbegin(); s != supers.rend(); ++s) {
            for (const auto& x : run(*s))
                if (x != kRootClass)
                    seq.push_back(x);
        }
        active_.pop_back();

        // Keep the last occurrence of every class.
        std::vector<std::string> kept;
        std::set<std::string, std::less<>> seen;
        for (auto it = seq.rbegin(); it != seq.rend(); ++it)
            if (seen.insert(*it).second)
                kept.push_back(*it);
        std::vector<std::string> result{name};
        result.insert(result.end(), kept.rbegin(), kept.rend());
        result.emplace_back(kRootClass);
        return memo_[name] = std::move(result);
    }

private:
    const SupertypeGraph& graph_;
    std::map<std::string, std::vector<std::string>, std::less<>> memo_;
    std::vector<std::string> active_;
};

} // namespace

std::vector<std::string> linearize(std::string_view cls, const SupertypeGraph& graph)
{
    Linearizer l(graph);
    return l.run(cls);
}

// ---------------------------------------------------------------------------
// Woven classes

TypeRef WovenFeature::static_type() const
{
    TypeRef base = is_reference ? TypeRef::of_class(target) : TypeRef::primitive(type);
    if (!multiplicity.many)
        return base;
    return TypeRef::collection(is_reference ? CollKind::OrderedSet : CollKind::Sequence, base);
}

const WovenFeature* WovenClass::feature(std::string_view n) const
{
    auto it = feature_index.find(n);
    return it == feature_index.end() ? nullptr : &features[it->second];
}

std::optional<std::size_t> WovenClass::feature_slot(std::string_view n) const
{
    auto it = feature_index.find(n);
    if (it == feature_index.end())
        return std::nullopt;
    return it->second;
}

const MethodEntry* WovenClass::resolve(std::string_view op) const
{
    auto it = method_table.find(op);
    if (it == method_table.end() || it->second.empty())
        return nullptr;
    return &it->second.front();
}

const SignatureEntry* WovenClass::signature(std::string_view op) const
{
    auto it = signatures.find(op);
    return it == signatures.end() ? nullptr : &it->second;
}

bool WovenClass::is_kind_of(std::string_view ancestor) const
{
    return std::find(linearization.begin(), linearization.end(), ancestor) != linearization.end();
}

const WovenClass* WovenModel::find(std::string_view name) const
{
    auto it = classes.find(name);
    return it == classes.end() ? nullptr : &it->second;
}

const WovenClass& WovenModel::at(std::string_view name) const
{
    const WovenClass* wc = find(name);
    if (!wc)
        throw Fault(FaultKind::UnknownClass, "unknown class '" + std::string(name) + "'", std::string(name));
    return *wc;
}

bool WovenModel::is_kind_of(std::string_view cls, std::string_view ancestor) const
{
    const WovenClass* wc = find(cls);
    return wc && wc->is_kind_of(ancestor);
}

bool WovenModel::conforms(const TypeRef& sub, const TypeRef& super) const
{
    using K = TypeRef::Kind;
    if (sub == super)
        return true;
    switch (super.kind()) {
    case K::Class:
        if (sub.kind() == K::Null)
            return true;
        return sub.is_class() && is_kind_of(sub.class_name(), super.class_name());
    case K::Collection:
        if (sub.kind() == K::Null)
            return true;
        return sub.is_collection() && conforms(sub.element(), super.element());
    case K::Void:
    case K::Null:
        return sub.kind() == K::Null;
    default:
        return false;
    }
}

std::vector<Diagnostic> resolve_method_conflicts(WovenClass& wc, const WovenModel& wm)
{
    std::vector<Diagnostic> diags;
    const std::string unit = wc.base_unit;

    auto lin_of = [&](const std::string& n) -> const std::vector<std::string>* {
        if (n == wc.name)
            return &wc.linearization;
        const WovenClass* c = wm.find(n);
        return c ? &c->linearization : nullptr;
    };
    auto class_of = [&](const std::string& n) -> const WovenClass* { return n == wc.name ? &wc : wm.find(n); };

    // Renamings declared on this class or any ancestor; the ancestor's own
    // table is not consulted, only the names it mentions.
    for (const auto& r_name : wc.linearization) {
        const WovenClass* r = class_of(r_name);
        if (!r)
            continue;
        for (const auto& rn : r->renamings) {
            auto fail = [&](const std::string& msg) {
                if (r_name == wc.name) {
                    std::string u = r->aspect_units.empty() ? unit : r->aspect_units.front();
                    diags.push_back({u, rn.pos, "RenameTargetMissing", msg});
                }
            };
            const auto* flin = lin_of(rn.from_class);
            if (!flin || rn.from_class == r_name || !r->is_kind_of(rn.from_class)) {
                fail("rename " + rn.op + " from " + rn.from_class + ": " + rn.from_class
                     + " is not a supertype of " + r_name);
                continue;
            }
            std::string definer;
            for (const auto& k : *flin) {
                const WovenClass* kc = class_of(k);
                if (!kc)
                    continue;
                bool defines = std::any_of(kc->own_methods.begin(), kc->own_methods.end(),
                                           [&](const MethodEntry& e) { return e.method->sig.name == rn.op; });
                if (defines) {
                    definer = k;
                    break;
                }
            }
            if (definer.empty()) {
                fail("rename " + rn.op + " from " + rn.from_class + ": " + rn.from_class + " has no operation "
                     + rn.op);
                continue;
            }
            auto it = wc.method_table.find(rn.op);
            if (it == wc.method_table.end())
                continue;
            auto& entries = it->second;
            auto moved = std::find_if(entries.begin(), entries.end(),
                                      [&](const MethodEntry& e) { return e.defining_class == definer; });
            if (moved == entries.end())
                continue;
            MethodEntry e = *moved;
            entries.erase(moved);
            auto& dst = wc.method_table[rn.new_name];
            dst.push_back(e);
            if (!wc.signatures.count(rn.new_name)) {
                OperationSig sig = e.method->sig;
                sig.name = rn.new_name;
                wc.signatures.emplace(rn.new_name, SignatureEntry{std::move(sig), definer});
            }
            if (entries.empty())
                wc.method_table.erase(rn.op);
        }
    }

    for (const auto& [op, entries] : wc.method_table) {
        if (entries.size() < 2)
            continue;
        const auto& winner = entries.front().defining_class;
        const auto* wlin = lin_of(winner);
        for (std::size_t i = 1; i < entries.size(); ++i) {
            const auto& other = entries[i].defining_class;
            if (wlin && std::find(wlin->begin(), wlin->end(), other) != wlin->end())
                continue;
            diags.push_back({unit, wc.pos, "AmbiguousMethod",
                             wc.name + "." + op + " is defined by unrelated classes " + winner + " and " + other
                                 + "; add `rename " + op + " from " + other + " as <name>;`"});
        }
    }
    return diags;
}

WovenClass flatten_contracts(const WovenClass& wc, const WovenModel& wm)
{
    WovenClass out = wc;
    out.flat_invariants.clear();
    out.flat_pre.clear();
    out.flat_post.clear();
    for (const auto& k : wc.linearization) {
        const WovenClass* kc = k == wc.name ? &wc : wm.find(k);
        if (!kc)
            continue;
        for (const auto& inv : kc->own_invariants)
            out.flat_invariants.push_back({k, inv});
        auto group = [&](const std::vector<OpCondition>& conds, auto& flat) {
            std::vector<std::string> ops;
            for (const auto& c : conds)
                if (std::find(ops.begin(), ops.end(), c.op_name) == ops.end())
                    ops.push_back(c.op_name);
            for (const auto& op : ops) {
                ConditionGroup g{k, {}};
                for (const auto& c : conds)
                    if (c.op_name == op)
                        g.clauses.push_back(c);
                flat[op].push_back(std::move(g));
            }
        };
        group(kc->own_pre, out.flat_pre);
        group(kc->own_post, out.flat_post);
    }
    return out;
}

std::vector<Diagnostic> validate_woven(const WovenModel& wm)
{
    std::vector<Diagnostic> out;
    auto report = [&](const WovenClass& c, std::string code, std::string msg) {
        out.push_back({c.base_unit, c.pos, std::move(code), std::move(msg)});
    };
    auto closed = [&](const TypeRef& t) {
        const TypeRef* cur = &t;
        while (cur->is_collection())
            cur = &cur->element();
        return !cur->is_class() || wm.find(cur->class_name());
    };

    if (!wm.find(wm.root_class))
        out.push_back({{}, {}, "ClosureError", "root class " + wm.root_class + " is missing"});

    for (const auto& [name, c] : wm.classes) {
        const auto& lin = c.linearization;
        if (lin.empty() || lin.front() != name)
            report(c, "LinearizationError", "linearization of " + name + " does not start with " + name);
        std::set<std::string> seen;
        for (const auto& k : lin) {
            if (!seen.insert(k).second)
                report(c, "LinearizationError", "linearization of " + name + " lists " + k + " twice");
            if (!wm.find(k))
                report(c, "ClosureError", "linearization of " + name + " names unknown class " + k);
        }
        if (name != wm.root_class && (lin.empty() || lin.back() != wm.root_class))
            report(c, "LinearizationError", "linearization of " + name + " does not end with " + wm.root_class);
        for (const auto& s : c.supertypes) {
            const WovenClass* sc = wm.find(s);
            if (!sc) {
                report(c, "ClosureError", name + " extends unknown class " + s);
                continue;
            }
            for (const auto& k : sc->linearization)
                if (!seen.count(k))
                    report(c, "LinearizationError", "linearization of " + name + " misses supertype " + k);
        }

        std::set<std::string> fnames;
        for (std::size_t i = 0; i < c.features.size(); ++i) {
            const auto& f = c.features[i];
            if (!fnames.insert(f.name).second)
                report(c, "FeatureClash", "feature " + name + "." + f.name + " appears twice");
            auto idx = c.feature_index.find(f.name);
            if (idx == c.feature_index.end() || idx->second != i)
                report(c, "FeatureClash", "feature index of " + name + " is out of sync at " + f.name);
            if (!f.is_reference)
                continue;
            const WovenClass* t = wm.find(f.target);
            if (!t) {
                report(c, "ClosureError", "feature " + name + "." + f.name + " targets unknown class " + f.target);
                continue;
            }
            if (f.opposite) {
                const WovenFeature* o = t->feature(*f.opposite);
                if (!o || !o->is_reference || o->opposite != f.name
                    || !wm.is_kind_of(f.defining_class, o->target))
                    report(c, "OppositeMismatch",
                           "opposite " + f.target + "." + *f.opposite + " of " + name + "." + f.name
                               + " is not mutual");
                else if (o->is_containment && f.is_containment)
                    report(c, "ContainmentOpposite", name + "." + f.name + " and its opposite are both containments");
            }
        }
        if (c.feature_index.size() != c.features.size())
            report(c, "FeatureClash", "feature index of " + name + " has stale entries");

        for (const auto& [op, s] : c.signatures) {
            for (const auto& p : s.sig.params)
                if (!closed(p.type))
                    report(c, "ClosureError", "parameter " + p.name + " of " + name + "." + op + " has unknown type "
                                                  + p.type.str());
            if (!closed(s.sig.return_type))
                report(c, "ClosureError", name + "." + op + " returns unknown type " + s.sig.return_type.str());
        }
        for (const auto& [op, entries] : c.method_table)
            for (const auto& e : entries)
                if (std::find(lin.begin(), lin.end(), e.defining_class) == lin.end())
                    report(c, "LinearizationError",
                           "method " + name + "." + op + " comes from " + e.defining_class
                               + ", which is not an ancestor");
    }
    return out;
}

// ---------------------------------------------------------------------------
// compose

namespace {

WovenFeature woven_of(const Attribute& a, const std::string& cls, const std::string& unit)
{
    WovenFeature f;
    f.name = a.name;
    f.type = a.type;
    f.multiplicity = a.multiplicity;
    f.defining_class = cls;
    f.unit = unit;
    return f;
}

WovenFeature woven_of(const Reference& r, const std::string& cls, const std::string& unit)
{
    WovenFeature f;
    f.name = r.name;
    f.is_reference = true;
    f.multiplicity = r.multiplicity;
    f.target = r.target;
    f.is_containment = r.is_containment;
    f.opposite = r.opposite;
    f.defining_class = cls;
    f.unit = unit;
    return f;
}

struct BaseDef {
    const MetaClass* cls;
    std::string unit;
    std::string package;
};

} // namespace

WovenModel compose(const std::vector<LoadedUnit>& units, const std::string& package_name)
{
    WovenModel wm;
    std::vector<Diagnostic> diags;
    auto flush = [&] {
        if (!diags.empty())
            throw DiagnosticError(Stage::Composition, std::move(diags));
    };

    // Base classes; Case 2 pairs abort.
    std::map<std::string, BaseDef, std::less<>> bases;
    for (const auto& u : units) {
        wm.units.emplace_back(u.name, u.kind());
        if (u.kind() != UnitKind::Metamodel)
            continue;
        const auto& mm = std::get<Metamodel>(u.content);
        if (wm.package_name.empty())
            wm.package_name = mm.name;
        for (const auto& c : mm.classes) {
            auto [it, fresh] = bases.emplace(c.name, BaseDef{&c, u.name, mm.name});
            if (fresh) {
                wm.class_order.push_back(c.name);
                continue;
            }
            const auto& prev = it->second;
            ClassDefinition a{c.name, ClassOrigin::BaseMetamodel, prev.unit};
            ClassDefinition b{c.name, ClassOrigin::BaseMetamodel, u.name};
            if (classify_pair(a, b) != CompositionCase::EcoreEcore)
                continue;
            if (prev.package == mm.name)
                diags.push_back({u.name, c.pos, "ForbiddenComposition",
                                 "class " + mm.qualified_name(c.name) + " is defined by both " + prev.unit + " and "
                                     + u.name + "; two metamodel classes cannot be composed"});
            else
                diags.push_back({u.name, c.pos, "ClassNameClash",
                                 "class " + c.name + " is defined as " + prev.package + "." + c.name + " in "
                                     + prev.unit + " and as " + mm.name + "." + c.name + " in " + u.name});
        }
    }
    if (!package_name.empty())
        wm.package_name = package_name;
    if (bases.empty())
        diags.push_back({units.empty() ? std::string() : units.front().name, {}, "NoMetamodel",
                         "a language needs at least one metamodel unit"});
    flush();

    // Case 1: fold aspects per class in require order.
    std::map<std::string, Contribution, std::less<>> contribs;
    auto fold = [&](Contribution c, SourcePos pos, const std::string& unit) {
        if (!bases.count(c.class_name)) {
            diags.push_back({unit, pos, "ResolutionError", "aspect targets unknown class " + c.class_name});
            return;
        }
        auto it = contribs.find(c.class_name);
        if (it == contribs.end()) {
            contribs.emplace(c.class_name, std::move(c));
            return;
        }
        try {
            it->second = merge(it->second, c);
        } catch (const DiagnosticError& e) {
            diags.insert(diags.end(), e.diagnostics().begin(), e.diagnostics().end());
        }
    };
    for (const auto& u : units) {
        try {
            if (u.kind() == UnitKind::Contracts)
                for (const auto& c : std::get<ContractModule>(u.content).contributions)
                    fold(contribution_of(c, u.name), c.pos, u.name);
            if (u.kind() == UnitKind::Behavior)
                for (const auto& a : std::get<BehaviorModule>(u.content).aspects)
                    fold(contribution_of(a, u.name), a.pos, u.name);
        } catch (const DiagnosticError& e) {
            diags.insert(diags.end(), e.diagnostics().begin(), e.diagnostics().end());
        }
    }
    flush();

    // Root.
    WovenClass root;
    root.name = wm.root_class;
    root.is_abstract = true;
    root.linearization = {wm.root_class};
    wm.classes.emplace(root.name, std::move(root));

    // Case 3: attach merged contributions to base classes.
    for (const auto& name : wm.class_order) {
        const auto& base = bases.at(name);
        const MetaClass& mc = *base.cls;
        WovenClass wc;
        wc.name = name;
        wc.is_abstract = mc.is_abstract;
        wc.base_unit = base.unit;
        wc.pos = mc.pos;
        wc.supertypes = mc.supertypes;
        for (const auto& a : mc.attributes)
            wc.own_features.push_back(woven_of(a, name, base.unit));
        for (const auto& r : mc.references)
            wc.own_features.push_back(woven_of(r, name, base.unit));
        wc.own_operations = mc.operations;
        for (const auto& f : wc.own_features)
            wm.provenance[name + "." + f.name] = base.unit;
        for (const auto& o : wc.own_operations)
            wm.provenance[name + "." + o.name] = base.unit;

        auto cit = contribs.find(name);
        if (cit != contribs.end()) {
            const Contribution& c = cit->second;
            wc.aspect_units = c.units;
            for (const auto& s : c.added_supertypes) {
                if (s == name || std::find(wc.supertypes.begin(), wc.supertypes.end(), s) != wc.supertypes.end())
                    continue;
                if (!bases.count(s)) {
                    diags.push_back({c.provenance.empty() ? base.unit : c.units.front(), {}, "ResolutionError",
                                     "aspect of " + name + " inherits unknown class " + s});
                    continue;
                }
                wc.supertypes.push_back(s);
            }
            auto add_feature = [&](WovenFeature f, SourcePos pos) {
                for (const auto& g : wc.own_features)
                    if (g.name == f.name)
                        diags.push_back({f.unit, pos, "FeatureClash",
                                         "feature " + name + "." + f.name + " is contributed by both " + g.unit
                                             + " and " + f.unit});
                wm.provenance[name + "." + f.name] = f.unit;
                wc.own_features.push_back(std::move(f));
            };
            for (const auto& a : c.attributes)
                add_feature(woven_of(a, name, c.provenance.at("feature:" + a.name)), a.pos);
            for (const auto& r : c.references)
                add_feature(woven_of(r, name, c.provenance.at("feature:" + r.name)), r.pos);
            for (const auto& m : c.methods) {
                const auto& unit = c.provenance.at("method:" + m->sig.name);
                wc.own_methods.push_back(MethodEntry{name, m, unit, m->sig.name});
                wm.provenance[name + "." + m->sig.name] = unit;
            }
            wc.renamings = c.renamings;
            wc.own_invariants = c.invariants;
            wc.own_pre = c.pre_conditions;
            wc.own_post = c.post_conditions;
            for (const auto& i : c.invariants)
                wm.provenance[name + ".inv:" + i.name] = c.provenance.at("inv:" + i.name);
            for (const auto& p : c.pre_conditions)
                wm.provenance[name + ".pre:" + p.op_name + ":" + p.name]
                    = c.provenance.at("pre:" + p.op_name + ":" + p.name);
            for (const auto& p : c.post_conditions)
                wm.provenance[name + ".post:" + p.op_name + ":" + p.name]
                    = c.provenance.at("post:" + p.op_name + ":" + p.name);
        }
        wm.classes.emplace(name, std::move(wc));
    }
    flush();

    // Linearize everything against the merged supertype graph.
    SupertypeGraph graph;
    for (const auto& name : wm.class_order)
        graph[name] = wm.classes.at(name).supertypes;
    Linearizer lin(graph);
    for (const auto& name : wm.class_order) {
        auto& wc = wm.classes.at(name);
        try {
            wc.linearization = lin.run(name);
        } catch (const DiagnosticError& e) {
            for (auto d : e.diagnostics()) {
                d.unit = wc.aspect_units.empty() ? wc.base_unit : wc.aspect_units.back();
                if (std::none_of(diags.begin(), diags.end(),
                                 [&](const Diagnostic& x) { return x.message == d.message; }))
                    diags.push_back(std::move(d));
            }
        }
    }
    flush();

    // Feature tables, signatures and method tables.
    for (const auto& name : wm.class_order) {
        auto& wc = wm.classes.at(name);
        for (auto k = wc.linearization.rbegin(); k != wc.linearization.rend(); ++k) {
            const WovenClass& kc = wm.classes.at(*k);
            for (const auto& f : kc.own_features) {
                if (auto prev = wc.feature(f.name)) {
                    if (prev->defining_class == f.defining_class)
                        continue; // already reported against this class
                    diags.push_back({wc.base_unit, wc.pos, "FeatureClash",
                                     name + " inherits feature " + f.name + " from both " + prev->defining_class
                                         + " and " + f.defining_class});
                    continue;
                }
                wc.feature_index.emplace(f.name, wc.features.size());
                wc.features.push_back(f);
            }
        }
        for (const auto& k : wc.linearization) {
            const WovenClass& kc = wm.classes.at(k);
            for (const auto& o : kc.own_operations)
                wc.signatures.emplace(o.name, SignatureEntry{o, k});
            for (const auto& m : kc.own_methods) {
                wc.signatures.emplace(m.method->sig.name, SignatureEntry{m.method->sig, k});
                wc.method_table[m.method->sig.name].push_back(m);
            }
        }

        // `method` must reopen an existing signature, `operation` must not.
        for (const auto& m : wc.own_methods) {
            const auto& sig = m.method->sig;
            const OperationSig* existing = nullptr;
            for (const auto& o : wc.own_operations)
                if (o.name == sig.name)
                    existing = &o;
            for (std::size_t i = 1; !existing && i < wc.linearization.size(); ++i) {
                const WovenClass& kc = wm.classes.at(wc.linearization[i]);
                for (const auto& o : kc.own_operations)
                    if (o.name == sig.name)
                        existing = &o;
                for (const auto& e : kc.own_methods)
                    if (e.method->sig.name == sig.name)
                        existing = &e.method->sig;
            }
            if (m.method->overrides && !existing)
                diags.push_back({m.unit, m.method->pos, "NothingToOverride",
                                 "method " + name + "." + sig.name
                                     + " overrides nothing; declare it with 'operation'"});
            else if (!m.method->overrides && existing)
                diags.push_back({m.unit, m.method->pos, "MissingOverride",
                                 "operation " + name + "." + sig.name
                                     + " already exists; redefine it with 'method'"});
            else if (existing && !(existing->params == sig.params && existing->return_type == sig.return_type))
                diags.push_back({m.unit, m.method->pos, "SignatureMismatch",
                                 "method " + name + "." + sig.name + " does not match the inherited signature"});
        }
    }
    flush();

    for (const auto& name : wm.class_order) {
        auto& wc = wm.classes.at(name);
        auto d = resolve_method_conflicts(wc, wm);
        diags.insert(diags.end(), d.begin(), d.end());
    }
    flush();

    for (const auto& name : wm.class_order) {
        auto& wc = wm.classes.at(name);
        wc = flatten_contracts(wc, wm);
        wc.origin = ClassOrigin::BaseMetamodel;
    }

    diags = validate_woven(wm);
    flush();
    return wm;
}

// ---------------------------------------------------------------------------
// Report

CompositionReport emit_report(const WovenModel& wm)
{
    CompositionReport r;
    r.package_name = wm.package_name;
    r.units = wm.units;
    for (const auto& name : wm.class_order) {
        const WovenClass& wc = wm.at(name);
        if (wc.aspect_units.empty())
            continue;
        RichEntry e;
        e.class_name = name;
        e.rich_class = "Rich" + name;
        e.base_artifact = name + "Impl";
        for (const auto& u : wc.aspect_units)
            e.aspect_traits.push_back(name + "Aspect[" + std::filesystem::path(u).filename().string() + "]");
        if (!wc.is_abstract)
            e.factory_entry = "create" + name;
        e.conversions.emplace_back(name, e.rich_class);
        e.conversions.emplace_back(name + "Aspect", e.rich_class);
        r.entries.push_back(std::move(e));
    }
    return r;
}

std::string CompositionReport::render() const
{
    std::ostringstream os;
    os << "package " << package_name << "\n";
    for (const auto& [u, kind] : units)
        os << "unit " << u << " " << role_of(kind) << "\n";
    for (const auto& e : entries) {
        os << "rich " << e.rich_class << " = " << e.base_artifact;
        for (const auto& t : e.aspect_traits)
            os << " with " << t;
        os << "\n";
        if (e.factory_entry)
            os << "  factory " << *e.factory_entry << " -> " << e.rich_class << "\n";
        for (const auto& [from, to] : e.conversions)
            os << "  conversion " << from << " -> " << to << "\n";
    }
    os << "rich classes: " << entries.size() << "\n";
    return os.str();
}

} // namespace mashup
