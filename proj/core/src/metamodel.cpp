#include "mashup/metamodel.hpp"

#include "parser.hpp"

#include <functional>
#include <set>
#include <sstream>

namespace mashup {

const Attribute* MetaClass::find_attribute(std::string_view n) const
{
    for (const auto& a : attributes)
        if (a.name == n)
            return &a;
    return nullptr;
}

const Reference* MetaClass::find_reference(std::string_view n) const
{
    for (const auto& r : references)
        if (r.name == n)
            return &r;
    return nullptr;
}

const OperationSig* MetaClass::find_operation(std::string_view n) const
{
    for (const auto& o : operations)
        if (o.name == n)
            return &o;
    return nullptr;
}

const MetaClass* Metamodel::find(std::string_view class_name) const
{
    for (const auto& c : classes)
        if (c.name == class_name)
            return &c;
    return nullptr;
}

namespace {

void parse_feature(detail::Parser& p, MetaClass& cls)
{
    SourcePos pos = p.peek().pos;
    if (p.accept_keyword("attr")) {
        cls.attributes.push_back(p.parse_attribute(pos));
    } else if (p.accept_keyword("ref")) {
        cls.references.push_back(p.parse_reference(pos));
    } else if (p.accept_keyword("op")) {
        OperationSig sig;
        sig.pos = pos;
        sig.name = p.expect_ident("operation name").text;
        sig.params = p.parse_params();
        if (p.accept_punct(":"))
            sig.return_type = p.parse_type();
        p.expect_punct(";");
        cls.operations.push_back(std::move(sig));
    } else {
        p.fail("expected 'attr', 'ref', 'op' or '}'");
    }
}

} // namespace

Metamodel parse_metamodel_unchecked(std::string_view text, const std::string& unit)
{
    detail::Parser p(text, unit);
    Metamodel mm;
    mm.source_unit = unit;
    p.expect_keyword("metamodel");
    mm.name = p.expect_ident("metamodel name").text;
    p.expect_punct("{");
    while (!p.at_punct("}")) {
        if (p.at_end())
            p.fail("unexpected end of input, expected '}'");
        MetaClass cls;
        cls.pos = p.peek().pos;
        cls.is_abstract = p.accept_keyword("abstract");
        p.expect_keyword("class");
        cls.name = p.expect_ident("class name").text;
        if (p.accept_keyword("extends")) {
            do {
                cls.supertypes.push_back(p.expect_ident("supertype name").text);
            } while (p.accept_punct(","));
        }
        p.expect_punct("{");
        while (!p.accept_punct("}")) {
            if (p.at_end())
                p.fail("unexpected end of input inside class " + cls.name);
            parse_feature(p, cls);
        }
        mm.classes.push_back(std::move(cls));
    }
    p.expect_punct("}");
    if (!p.at_end())
        p.fail("unexpected input after metamodel body");
    return mm;
}

Metamodel parse_metamodel(std::string_view text, const std::string& unit)
{
    Metamodel mm = parse_metamodel_unchecked(text, unit);
    auto diags = validate_metamodel(mm);
    if (!diags.empty())
        throw DiagnosticError(Stage::Parse, std::move(diags));
    return mm;
}

std::map<std::string, std::vector<std::string>> supertype_graph(const Metamodel& mm)
{
    std::map<std::string, std::vector<std::string>> g;
    for (const auto& c : mm.classes)
        g[c.name] = c.supertypes;
    return g;
}

std::vector<Diagnostic> validate_metamodel(const Metamodel& mm)
{
    std::vector<Diagnostic> out;
    auto report = [&](SourcePos pos, std::string code, std::string msg) {
        out.push_back(Diagnostic{mm.source_unit, pos, std::move(code), std::move(msg)});
    };

    std::set<std::string> names;
    for (const auto& c : mm.classes) {
        if (c.name == kRootClass)
            report(c.pos, "ReservedName", "class name '" + c.name + "' is reserved for the reflection root");
        if (!names.insert(c.name).second)
            report(c.pos, "DuplicateClass", "class " + mm.qualified_name(c.name) + " declared more than once");
    }

    auto resolve_type = [&](const TypeRef& t, SourcePos pos, const std::string& where) {
        const TypeRef* cur = &t;
        while (cur->is_collection())
            cur = &cur->element();
        if (cur->is_class() && cur->class_name() != kRootClass && !mm.find(cur->class_name()))
            report(pos, "ResolutionError", "unknown type '" + cur->class_name() + "' in " + where);
    };

    for (const auto& c : mm.classes) {
        std::set<std::string> supers;
        for (const auto& s : c.supertypes) {
            if (!mm.find(s))
                report(c.pos, "ResolutionError", "class " + c.name + " extends unknown class " + s);
            if (!supers.insert(s).second)
                report(c.pos, "DuplicateSupertype", "class " + c.name + " lists supertype " + s + " twice");
        }

        std::set<std::string> features;
        for (const auto& a : c.attributes)
            if (!features.insert(a.name).second)
                report(a.pos, "DuplicateFeature", "feature " + c.name + "." + a.name + " declared twice");
        for (const auto& r : c.references)
            if (!features.insert(r.name).second)
                report(r.pos, "DuplicateFeature", "feature " + c.name + "." + r.name + " declared twice");

        for (const auto& r : c.references) {
            const MetaClass* target = mm.find(r.target);
            if (!target) {
                report(r.pos, "ResolutionError",
                       "reference " + c.name + "." + r.name + " targets unknown class " + r.target);
                continue;
            }
            if (!r.opposite)
                continue;
            const Reference* opp = target->find_reference(*r.opposite);
            if (!opp) {
                report(r.pos, "ResolutionError",
                       "opposite " + r.target + "." + *r.opposite + " of " + c.name + "." + r.name + " does not exist");
                continue;
            }
            if (!opp->opposite || *opp->opposite != r.name || opp->target != c.name)
                report(r.pos, "OppositeMismatch",
                       "opposites are not mutual: " + c.name + "." + r.name + " -> " + r.target + "." + *r.opposite
                           + " but " + r.target + "." + opp->name + " -> "
                           + (opp->opposite ? opp->target + "." + *opp->opposite : std::string("<none>")));
            if (r.is_containment && opp->is_containment)
                report(r.pos, "ContainmentOpposite",
                       "containment reference " + c.name + "." + r.name + " has a containment opposite");
        }

        std::set<std::string> ops;
        for (const auto& o : c.operations) {
            if (!ops.insert(o.name).second)
                report(o.pos, "DuplicateOperation", "operation " + c.name + "." + o.name + " declared twice");
            std::set<std::string> params;
            for (const auto& prm : o.params) {
                if (!params.insert(prm.name).second)
                    report(o.pos, "DuplicateParameter",
                           "parameter " + prm.name + " repeated in " + c.name + "." + o.name);
                resolve_type(prm.type, o.pos, c.name + "." + o.name);
            }
            resolve_type(o.return_type, o.pos, c.name + "." + o.name);
        }
    }

    // Supertype cycles: colour-marking DFS, one diagnostic per cycle entry.
    std::map<std::string, int> colour;
    std::set<std::string> reported;
    std::function<void(const MetaClass&, std::vector<std::string>&)> dfs = [&](const MetaClass& c,
                                                                                std::vector<std::string>& path) {
        colour[c.name] = 1;
        path.push_back(c.name);
        for (const auto& s : c.supertypes) {
            const MetaClass* sc = mm.find(s);
            if (!sc)
                continue;
            if (colour[s] == 1) {
                if (reported.insert(s).second) {
                    std::string cycle;
                    bool on = false;
                    for (const auto& n : path) {
                        on = on || n == s;
                        if (on)
                            cycle += n + " -> ";
                    }
                    report(sc->pos, "CycleError", "supertype cycle: " + cycle + s);
                }
            } else if (colour[s] == 0) {
                dfs(*sc, path);
            }
        }
        path.pop_back();
        colour[c.name] = 2;
    };
    for (const auto& c : mm.classes) {
        if (colour[c.name] == 0) {
            std::vector<std::string> path;
            dfs(c, path);
        }
    }
    return out;
}

std::string pretty_print(const Metamodel& mm)
{
    std::ostringstream os;
    os << "metamodel " << mm.name << " {\n";
    for (const auto& c : mm.classes) {
        os << "  " << (c.is_abstract ? "abstract " : "") << "class " << c.name;
        for (std::size_t i = 0; i < c.supertypes.size(); ++i)
            os << (i == 0 ? " extends " : ", ") << c.supertypes[i];
        os << " {\n";
        for (const auto& a : c.attributes) {
            os << "    attr " << a.name << ": " << to_string(a.type);
            if (!a.multiplicity.is_default())
                os << a.multiplicity.str();
            os << ";\n";
        }
        for (const auto& r : c.references) {
            os << "    ref " << r.name << ": " << r.target;
            if (!r.multiplicity.is_default())
                os << r.multiplicity.str();
            if (r.is_containment)
                os << " containment";
            if (r.opposite)
                os << " opposite " << *r.opposite;
            os << ";\n";
        }
        for (const auto& o : c.operations) {
            os << "    op " << o.name << "(";
            for (std::size_t i = 0; i < o.params.size(); ++i)
                os << (i ? ", " : "") << o.params[i].name << ": " << o.params[i].type.str();
            os << ")";
            if (!o.return_type.is_void())
                os << ": " << o.return_type.str();
            os << ";\n";
        }
        os << "  }\n";
    }
    os << "}\n";
    return os.str();
}

} // namespace mashup
