#include "mashup/composer.hpp"

#include "support.hpp"

#include <doctest.h>

#include <algorithm>
#include <regex>
#include <set>

using namespace mashup;

namespace {

std::vector<std::string> composition_codes(const testing::Files& files)
{
    try {
        compose(testing::load_units(files), "t");
    } catch (const DiagnosticError& e) {
        CHECK(e.stage() == Stage::Composition);
        std::vector<std::string> out;
        for (const auto& d : e.diagnostics())
            out.push_back(d.code);
        return out;
    }
    return {};
}

// Linearization by right-biased concatenation: lin(S_n) +: ... +: lin(S_1),
// where `a +: b` drops from `a` everything already in `b`.
std::vector<std::string> oracle_lin(const std::string& c, const SupertypeGraph& g)
{
    std::vector<std::string> acc;
    for (const auto& s : g.at(c)) {
        std::vector<std::string> l = oracle_lin(s, g);
        l.pop_back();
        std::vector<std::string> next;
        for (const auto& x : l)
            if (std::find(acc.begin(), acc.end(), x) == acc.end())
                next.push_back(x);
        next.insert(next.end(), acc.begin(), acc.end());
        acc = std::move(next);
    }
    acc.insert(acc.begin(), c);
    acc.emplace_back(kRootClass);
    return acc;
}

// Supertypes point only to earlier classes, so the graph is acyclic.
SupertypeGraph random_dag(testing::Rng& rng, int n, double p = 0.45)
{
    SupertypeGraph g;
    for (int i = 0; i < n; ++i) {
        std::vector<std::string> sups;
        for (int j = 0; j < i; ++j)
            if (rng.coin(p))
                sups.push_back("C" + std::to_string(j));
        std::shuffle(sups.begin(), sups.end(), rng.engine());
        g["C" + std::to_string(i)] = sups;
    }
    return g;
}

std::string metamodel_text(const std::string& name, const SupertypeGraph& g, int n, bool with_ops = false)
{
    std::string mm = "metamodel " + name + " {\n";
    for (int i = 0; i < n; ++i) {
        std::string c = "C" + std::to_string(i);
        mm += "  class " + c;
        const auto& sups = g.at(c);
        for (std::size_t k = 0; k < sups.size(); ++k)
            mm += (k ? ", " : " extends ") + sups[k];
        mm += with_ops ? " { op f" + std::to_string(i) + "(x : Int) : Int; }\n" : std::string(" {}\n");
    }
    return mm + "}\n";
}

bool contains(const std::vector<std::string>& v, const std::string& x)
{
    return std::find(v.begin(), v.end(), x) != v.end();
}

const char* kDiamondMm = "metamodel d { class A {} class B extends A {} class C extends A {} class D extends B, C {} }";
const char* kDiamondAct = R"(package d; require "d.mm";
aspect class A { operation run() : String is do return "A" end }
aspect class B { method run() : String is do return "B" end }
aspect class C { method run() : String is do return "C" end })";

} // namespace

TEST_CASE("resolve_requires: manifest order, nested requires and duplicates")
{
    MemoryUnitLoader loader({{"m.mm", "metamodel m { class A {} }"},
                             {"c.inv", "package m; require \"m.mm\"; aspect class A { inv t : true }"},
                             {"b.act", "package m; require \"m.mm\"; aspect class A {}"}});
    MashupManifest man = parse_manifest("package m; require \"c.inv\"; require \"b.act\"; require \"c.inv\";");
    auto units = resolve_requires(man, loader);
    REQUIRE(units.size() == 3);
    CHECK(units[0].name == "m.mm");
    CHECK(units[1].name == "c.inv");
    CHECK(units[2].name == "b.act");
    CHECK(units[0].kind() == UnitKind::Metamodel);
    CHECK(units[1].kind() == UnitKind::Contracts);
    CHECK(units[2].kind() == UnitKind::Behavior);
    CHECK(loader.reads() == 3);
}

TEST_CASE("resolve_requires: single unit and missing unit")
{
    MemoryUnitLoader loader;
    loader.add("m.mm", "metamodel m { class A {} }");
    auto units = resolve_requires(parse_manifest("package m; require \"m.mm\";"), loader);
    CHECK(units.size() == 1);
    try {
        resolve_requires(parse_manifest("package m; require \"gone.act\";"), loader);
        FAIL("expected UnitNotFound");
    } catch (const DiagnosticError& e) {
        CHECK(e.stage() == Stage::Parse);
        CHECK(e.has_code("UnitNotFound"));
    }
    CHECK(unit_kind_for("x.kmt") == UnitKind::Behavior);
    CHECK(unit_kind_for("x.ocl") == UnitKind::Contracts);
    CHECK_FALSE(unit_kind_for("x.txt"));
}

TEST_CASE("manifest: entry point and syntax errors")
{
    MashupManifest m = parse_manifest("package fuml;\nrequire \"a.mm\"\nmain Activity.execute;");
    CHECK(m.package_name == "fuml");
    REQUIRE(m.main);
    CHECK(m.main->class_name == "Activity");
    CHECK(m.main->op_name == "execute");
    CHECK_THROWS_AS(parse_manifest("package fuml; main Activity;"), DiagnosticError);
}

TEST_CASE("classify_pair: the three cases")
{
    ClassDefinition base{"A", ClassOrigin::BaseMetamodel, "a.mm"};
    ClassDefinition base2{"A", ClassOrigin::BaseMetamodel, "b.mm"};
    ClassDefinition asp{"A", ClassOrigin::Aspect, "a.act"};
    ClassDefinition asp2{"A", ClassOrigin::Aspect, "a.inv"};
    CHECK(classify_pair(asp, asp2) == CompositionCase::KmtKmt);
    CHECK(classify_pair(base, base2) == CompositionCase::EcoreEcore);
    CHECK(classify_pair(base, asp) == CompositionCase::EcoreKmt);
    CHECK(classify_pair(asp, base) == CompositionCase::EcoreKmt);
}

TEST_CASE("compose: one metamodel and one aspect")
{
    auto units = testing::load_units({{"m.mm", "metamodel m { class A { attr x : Int; } }"},
                                      {"a.act", R"(package m; require "m.mm";
                                        aspect class A { attr y : Int; operation f() : Int is do return self.x end })"}});
    WovenModel wm = compose(units, "m");
    const WovenClass& a = wm.at("A");
    CHECK(a.features.size() == 2);
    CHECK(a.aspect_units == std::vector<std::string>{"a.act"});
    REQUIRE(a.resolve("f"));
    CHECK(a.resolve("f")->defining_class == "A");
    CHECK(wm.provenance.at("A.y") == "a.act");
    CHECK(validate_woven(wm).empty());
}

TEST_CASE("compose: the aspect lands on the class it names")
{
    auto wm = testing::weave({{"m.mm", "metamodel m { class A {} class B {} }"},
                              {"a.act", "package m; require \"m.mm\"; aspect class B { attr z : Int; }"}});
    CHECK(wm->at("A").features.empty());
    CHECK(wm->at("B").feature("z"));
}

TEST_CASE("compose: aspect without a base class, clashes and bad renames")
{
    const char* mm = "metamodel m { class A { attr x : Int; } class B {} }";
    CHECK(composition_codes({{"m.mm", mm}, {"a.act", "package m; require \"m.mm\"; aspect class Z {}"}})
          == std::vector<std::string>{"ResolutionError"});
    CHECK(composition_codes({{"m.mm", mm}, {"a.act", "package m; require \"m.mm\"; aspect class A { attr x : Int; }"}})
          == std::vector<std::string>{"FeatureClash"});
    CHECK(composition_codes({{"m.mm", mm},
                             {"a.act", "package m; require \"m.mm\"; aspect class A { attr y : Int; }"},
                             {"b.act", "package m; require \"m.mm\"; aspect class A { attr y : Bool; }"}})
          == std::vector<std::string>{"FeatureClash"});
    CHECK(composition_codes({{"m.mm", mm}, {"a.act", "package m; require \"m.mm\"; aspect class A { rename f from B as g; }"}})
          == std::vector<std::string>{"RenameTargetMissing"});
    auto cycle = composition_codes(
        {{"m.mm", mm}, {"a.act", "package m; require \"m.mm\"; aspect class A inherits B {} aspect class B inherits A {}"}});
    CHECK(cycle == std::vector<std::string>{"CycleError", "CycleError"});
    CHECK(composition_codes({{"m.mm", mm}, {"n.mm", "metamodel m { class B {} }"}})
          == std::vector<std::string>{"ForbiddenComposition"});
}

TEST_CASE("linearize: examples")
{
    SupertypeGraph g{{"A", {}}, {"B", {"A"}}, {"C", {"A"}}, {"D", {"B", "C"}}};
    CHECK(linearize("A", g) == std::vector<std::string>{"A", "Root"});
    CHECK(linearize("D", g) == std::vector<std::string>{"D", "C", "B", "A", "Root"});
    SupertypeGraph pin{{"ActivityNode", {}},
                       {"ObjectNode", {"ActivityNode"}},
                       {"MultiplicityElement", {}},
                       {"Pin", {"ObjectNode", "MultiplicityElement"}}};
    CHECK(linearize("Pin", pin)
          == std::vector<std::string>{"Pin", "MultiplicityElement", "ObjectNode", "ActivityNode", "Root"});
    CHECK_THROWS_AS(linearize("X", SupertypeGraph{{"X", {"Y"}}, {"Y", {"X"}}}), DiagnosticError);
    CHECK_THROWS_AS(linearize("Q", g), DiagnosticError);

    auto lang = testing::fuml();
    CHECK(lang->woven.at("Pin").linearization
          == std::vector<std::string>{"Pin", "MultiplicityElement", "ObjectNode", "ActivityNode", "Root"});
}

TEST_CASE("conflicts: ambiguous diamond and the rename that resolves it")
{
    auto codes = composition_codes({{"d.mm", kDiamondMm}, {"d.act", kDiamondAct}});
    CHECK(codes == std::vector<std::string>{"AmbiguousMethod"});
    try {
        compose(testing::load_units({{"d.mm", kDiamondMm}, {"d.act", kDiamondAct}}), "d");
    } catch (const DiagnosticError& e) {
        const std::string& msg = e.diagnostics()[0].message;
        CHECK(msg.find("B") != std::string::npos);
        CHECK(msg.find("C") != std::string::npos);
        CHECK(e.diagnostics()[0].pos.line == 1);
    }

    auto wm = testing::weave({{"d.mm", kDiamondMm},
                              {"d.act", kDiamondAct},
                              {"r.act", "package d; require \"d.mm\"; aspect class D { rename run from C as runC; }"}});
    const WovenClass& d = wm->at("D");
    CHECK(d.resolve("run")->defining_class == "B");
    CHECK(d.resolve("runC")->defining_class == "C");
    CHECK(d.resolve("runC")->original_name == "run");
    CHECK(validate_woven(*wm).empty());
}

TEST_CASE("flatten_contracts: invariants and grouped pre/post by level")
{
    auto wm = testing::weave({{"m.mm", "metamodel m { class A { attr n : Int; op f(x : Int) : Int; } class B extends A {} }"},
                              {"c.inv", R"(package m; require "m.mm";
                                aspect class A { inv ia : true pre pa on f : x > 0 pre pa2 on f : x > 1 post qa on f : result > 0 }
                                aspect class B { inv ib : true pre pb on f : x < 0 })"}});
    const WovenClass& b = wm->at("B");
    REQUIRE(b.flat_invariants.size() == 2);
    CHECK(b.flat_invariants[0].owner == "B");
    CHECK(b.flat_invariants[1].owner == "A");
    const auto& pre = b.flat_pre.at("f");
    REQUIRE(pre.size() == 2);
    CHECK(pre[0].owner == "B");
    CHECK(pre[0].clauses.size() == 1);
    CHECK(pre[1].owner == "A");
    CHECK(pre[1].clauses.size() == 2);
    CHECK(b.flat_post.at("f").size() == 1);
    CHECK(wm->at("A").flat_pre.at("f").size() == 1);
}

TEST_CASE("report: fUML-lite golden and independent shape check")
{
    auto lang = testing::fuml();
    std::string report = emit_report(lang->woven).render();
    CHECK(report == testing::slurp(testing::fixture("golden/fuml_report.txt")));

    // Every class named by an aspect becomes a rich class; concrete ones get a factory.
    std::set<std::string> aspected;
    std::regex aspect_re(R"(aspect class (\w+))");
    for (const char* f : {"fuml-lite/fuml.inv", "fuml-lite/fuml.act"}) {
        std::string text = testing::slurp(testing::fixture(f));
        for (std::sregex_iterator it(text.begin(), text.end(), aspect_re), end; it != end; ++it)
            aspected.insert((*it)[1]);
    }
    std::string mm = testing::slurp(testing::fixture("fuml-lite/fuml.mm"));
    for (const auto& c : aspected) {
        CHECK(report.find("rich Rich" + c + " = " + c + "Impl with ") != std::string::npos);
        bool abstract = mm.find("abstract class " + c + " ") != std::string::npos;
        CHECK((report.find("factory create" + c + " -> Rich" + c + "\n") != std::string::npos) == !abstract);
    }
    CHECK(report.find("rich classes: " + std::to_string(aspected.size()) + "\n") != std::string::npos);
    CHECK(report.rfind("package fuml\nunit fuml.mm metamodel\nunit fuml.inv constraints\nunit fuml.act behavior\n", 0) == 0);
}

TEST_CASE("validate_woven: a corrupted class is reported")
{
    auto lang = testing::fuml();
    WovenModel wm = lang->woven;
    CHECK(validate_woven(wm).empty());
    wm.classes.at("Pin").linearization = {"Pin", "ObjectNode", "Root"};
    CHECK_FALSE(validate_woven(wm).empty());
    wm = lang->woven;
    auto& act = wm.classes.at("Activity");
    act.features.push_back(act.features.front());
    CHECK_FALSE(validate_woven(wm).empty());
    wm = lang->woven;
    wm.classes.at("JoinNode").method_table["isEnabled"].push_back(wm.at("Activity").method_table.at("execute").front());
    CHECK_FALSE(validate_woven(wm).empty());
}

TEST_CASE("property: merge is associative")
{
    testing::Rng rng(51);
    for (int i = 0; i < 200; ++i) {
        std::vector<Contribution> parts;
        int member = 0;
        for (int u = 0; u < 3; ++u) {
            std::string act = "package m; require \"m.mm\"; aspect class A";
            if (rng.coin(0.3))
                act += " inherits S" + std::to_string(rng.range(0, 2));
            act += " {\n";
            int n = rng.range(0, 3);
            for (int k = 0; k < n; ++k) {
                std::string id = std::to_string(member++);
                switch (rng.range(0, 2)) {
                case 0: act += " attr a" + id + " : Int;\n"; break;
                case 1: act += " ref r" + id + " : A [*];\n"; break;
                default: act += " operation m" + id + "() is do end\n"; break;
                }
            }
            act += "}";
            std::string unit = "u" + std::to_string(u) + ".act";
            parts.push_back(contribution_of(parse_behavior(act, unit).aspects[0], unit));
        }
        Contribution left = merge(merge(parts[0], parts[1]), parts[2]);
        Contribution right = merge(parts[0], merge(parts[1], parts[2]));
        CHECK(left == right);
    }
}

TEST_CASE("property: linearization agrees with a brute-force oracle and is well formed")
{
    testing::Rng rng(52);
    for (int i = 0; i < 300; ++i) {
        int n = rng.range(1, 7);
        SupertypeGraph g = random_dag(rng, n);
        for (const auto& [c, sups] : g) {
            auto lin = linearize(c, g);
            CHECK(lin == oracle_lin(c, g));
            CHECK(lin.front() == c);
            CHECK(lin.back() == kRootClass);
            CHECK(std::set<std::string>(lin.begin(), lin.end()).size() == lin.size());
            for (const auto& s : sups)
                for (const auto& k : linearize(s, g))
                    CHECK(contains(lin, k));
        }
    }
}

TEST_CASE("property: dispatch picks the first definer in the linearization")
{
    testing::Rng rng(53);
    int composed = 0, ambiguous = 0;
    for (int i = 0; i < 200; ++i) {
        int n = rng.range(2, 6);
        SupertypeGraph g = random_dag(rng, n);
        std::set<std::string> definers;
        for (const auto& [c, sups] : g)
            if (rng.coin(0.5))
                definers.insert(c);
        // An `operation` where no ancestor defines it, `method` otherwise.
        std::string act = "package g; require \"g.mm\";\n";
        for (const auto& c : definers) {
            auto lin = oracle_lin(c, g);
            bool inherited = std::any_of(lin.begin() + 1, lin.end(), [&](const auto& k) { return definers.count(k); });
            act += "aspect class " + c + " { " + (inherited ? "method" : "operation") + " who() : String is do return \""
                 + c + "\" end }\n";
        }
        bool expect_ambiguous = false;
        std::map<std::string, std::string> expect;
        for (const auto& [c, sups] : g) {
            std::vector<std::string> ds;
            for (const auto& k : oracle_lin(c, g))
                if (definers.count(k))
                    ds.push_back(k);
            if (ds.empty())
                continue;
            expect[c] = ds[0];
            auto first = oracle_lin(ds[0], g);
            for (std::size_t k = 1; k < ds.size(); ++k)
                expect_ambiguous |= !contains(first, ds[k]);
        }
        try {
            auto wm = testing::weave({{"g.mm", metamodel_text("g", g, n)}, {"g.act", act}});
            CHECK_FALSE(expect_ambiguous);
            ++composed;
            for (const auto& [c, sups] : g) {
                const MethodEntry* e = wm->at(c).resolve("who");
                if (expect.count(c)) {
                    REQUIRE(e);
                    CHECK(e->defining_class == expect[c]);
                } else {
                    CHECK_FALSE(e);
                }
            }
        } catch (const DiagnosticError& e) {
            CHECK(expect_ambiguous);
            CHECK(e.has_code("AmbiguousMethod"));
            ++ambiguous;
        }
    }
    CHECK(composed > 20);
    CHECK(ambiguous > 5);
}

TEST_CASE("property: adding a contract unit never removes contracts")
{
    testing::Rng rng(54);
    for (int i = 0; i < 100; ++i) {
        int n = rng.range(1, 5);
        SupertypeGraph g = random_dag(rng, n);
        std::string mm = metamodel_text("g", g, n, true);
        auto unit = [&](const std::string& tag) {
            std::string text = "package g; require \"g.mm\";\n";
            for (int k = 0; k < n; ++k) {
                if (!rng.coin(0.6))
                    continue;
                std::string c = "C" + std::to_string(k), f = "f" + std::to_string(k);
                text += "aspect class " + c + " { inv " + tag + c + " : true pre p" + tag + c + " on " + f + " : x > 0 post q"
                      + tag + c + " on " + f + " : result > 0 }\n";
            }
            return text;
        };
        std::string first = unit("a"), second = unit("b");
        auto small = testing::weave({{"g.mm", mm}, {"a.inv", first}});
        auto big = testing::weave({{"g.mm", mm}, {"a.inv", first}, {"b.inv", second}});
        for (const auto& [c, sups] : g) {
            const WovenClass& s = small->at(c);
            const WovenClass& b = big->at(c);
            std::set<std::string> have;
            for (const auto& fi : b.flat_invariants)
                have.insert(fi.owner + ":" + fi.inv.name);
            for (const auto& fi : s.flat_invariants)
                CHECK(have.count(fi.owner + ":" + fi.inv.name));
            for (const auto& [op, groups] : s.flat_pre) {
                std::set<std::string> names;
                for (const auto& gr : b.flat_pre.at(op))
                    for (const auto& cl : gr.clauses)
                        names.insert(cl.name);
                for (const auto& gr : groups)
                    for (const auto& cl : gr.clauses)
                        CHECK(names.count(cl.name));
            }
            for (const auto& [op, groups] : s.flat_post) {
                std::size_t total_s = 0, total_b = 0;
                for (const auto& gr : groups)
                    total_s += gr.clauses.size();
                for (const auto& gr : b.flat_post.at(op))
                    total_b += gr.clauses.size();
                CHECK(total_b >= total_s);
            }
        }
    }
}

TEST_CASE("property: two metamodels sharing a class name never compose")
{
    testing::Rng rng(55);
    for (int i = 0; i < 200; ++i) {
        std::set<std::string> left, right;
        for (int k = 0; k < rng.range(1, 4); ++k)
            left.insert("K" + std::to_string(rng.range(0, 5)));
        for (int k = 0; k < rng.range(1, 4); ++k)
            right.insert("K" + std::to_string(rng.range(0, 5)));
        auto text = [](const std::string& pkg, const std::set<std::string>& cs) {
            std::string t = "metamodel " + pkg + " {";
            for (const auto& c : cs)
                t += " class " + c + " {}";
            return t + " }";
        };
        bool same_pkg = rng.coin();
        testing::Files files{{"a.mm", text("p", left)}, {"b.mm", text(same_pkg ? "p" : "q", right)}};
        std::set<std::string> shared;
        std::set_intersection(left.begin(), left.end(), right.begin(), right.end(), std::inserter(shared, shared.end()));
        try {
            compose(testing::load_units(files), "t");
            CHECK(shared.empty());
        } catch (const DiagnosticError& e) {
            REQUIRE_FALSE(shared.empty());
            CHECK(e.stage() == Stage::Composition);
            CHECK(e.diagnostics().size() == shared.size());
            for (const auto& d : e.diagnostics()) {
                CHECK(d.code == (same_pkg ? "ForbiddenComposition" : "ClassNameClash"));
                CHECK(d.message.find("a.mm") != std::string::npos);
                CHECK(d.message.find("b.mm") != std::string::npos);
            }
        }
    }
}

TEST_CASE("property: composition and its report are deterministic")
{
    testing::Rng rng(56);
    for (int i = 0; i < 50; ++i) {
        int n = rng.range(1, 6);
        SupertypeGraph g = random_dag(rng, n);
        std::string act = "package g; require \"g.mm\";\n";
        for (int k = 0; k < n; ++k)
            if (rng.coin())
                act += "aspect class C" + std::to_string(k) + " { attr v" + std::to_string(k) + " : Int; }\n";
        testing::Files files{{"g.mm", metamodel_text("g", g, n)}, {"g.act", act}};
        std::string first = emit_report(compose(testing::load_units(files), "g")).render();
        for (int r = 0; r < 3; ++r)
            CHECK(emit_report(compose(testing::load_units(files), "g")).render() == first);
    }
}
