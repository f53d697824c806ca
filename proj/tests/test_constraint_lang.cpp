#include "mashup/contracts.hpp"

#include "support.hpp"

#include <doctest.h>

using namespace mashup;

namespace {

const char* kIsClass = R"(package fuml;
require "fuml.mm"
aspect class CreateObjectAction {
// The given classifier must be a class.
inv fUML_is_class :
  self.classifier.oclIsKindOf(Class)
}
)";

struct Fixture {
    std::unique_ptr<Language> lang = testing::fuml();

    ModelInstance model(const char* file) const
    {
        return load_model_file(testing::fixture(std::string("models/") + file), *lang);
    }

    const FlatInvariant& inv(const char* cls, const char* name) const
    {
        for (const auto& fi : lang->woven.at(cls).flat_invariants)
            if (fi.inv.name == name)
                return fi;
        throw std::runtime_error("no invariant");
    }
};

} // namespace

TEST_CASE("parse: classifier invariant")
{
    ContractModule cm = parse_contracts(kIsClass, "fuml.inv");
    CHECK(cm.package_name == "fuml");
    CHECK(cm.target_metamodel() == "fuml.mm");
    REQUIRE(cm.contributions.size() == 1);
    CHECK(cm.contributions[0].class_name == "CreateObjectAction");
    REQUIRE(cm.contributions[0].invariants.size() == 1);
    CHECK(cm.contributions[0].invariants[0].name == "fUML_is_class");
    CHECK(cm.contributions[0].invariants[0].body->as<TypeTest>());
}

TEST_CASE("parse: zero contributions")
{
    ContractModule cm = parse_contracts("package p; require \"m.mm\";");
    CHECK(cm.contributions.empty());
    CHECK(cm.imports == std::vector<std::string>{"m.mm"});
}

TEST_CASE("parse: pre and post clauses")
{
    ContractModule cm = parse_contracts(R"(package p; require "m.mm";
        aspect class A {
          pre positive on f : x > 0;
          post grows on f : result > x;
          inv i1 : true
        })");
    const auto& c = cm.contributions[0];
    REQUIRE(c.pre_conditions.size() == 1);
    CHECK(c.pre_conditions[0].op_name == "f");
    CHECK(c.post_conditions[0].name == "grows");
    CHECK(c.invariants.size() == 1);
}

TEST_CASE("parse: errors are positioned")
{
    CHECK_THROWS_AS(parse_contracts("aspect class A {}"), DiagnosticError);
    try {
        parse_contracts("package p; require \"m.mm\";\naspect class A {\n  inv : true }", "c.inv");
        FAIL("expected a syntax error");
    } catch (const DiagnosticError& e) {
        CHECK(e.stage() == Stage::Parse);
        CHECK(e.diagnostics()[0].unit == "c.inv");
        CHECK(e.diagnostics()[0].pos.line == 3);
    }
}

TEST_CASE("typecheck: non-Bool invariant parses but does not type")
{
    const char* mm = "metamodel m { class A { attr n : Int; } }";
    const char* inv = "package m; require \"m.mm\"; aspect class A { inv bad : 1 + 2 }";
    CHECK_NOTHROW(parse_contracts(inv));
    try {
        testing::weave({{"m.mm", mm}, {"m.inv", inv}});
        FAIL("expected a type error");
    } catch (const DiagnosticError& e) {
        CHECK(e.stage() == Stage::Type);
        CHECK(e.has_code("TypeError"));
    }
}

TEST_CASE("typecheck: post may use result only for non-Void operations")
{
    const char* mm = "metamodel m { class A { attr n : Int; op f(x : Int) : Int; op g(); } }";
    CHECK_NOTHROW(testing::weave(
        {{"m.mm", mm}, {"c.inv", "package m; require \"m.mm\"; aspect class A { post p on f : result > x }"}}));
    CHECK_THROWS_AS(testing::weave({{"m.mm", mm},
                                    {"c.inv", "package m; require \"m.mm\"; aspect class A { post p on g : result }"}}),
                    DiagnosticError);
    CHECK_THROWS_AS(testing::weave({{"m.mm", mm},
                                    {"c.inv", "package m; require \"m.mm\"; aspect class A { pre p on nope : true }"}}),
                    DiagnosticError);
}

TEST_CASE("typecheck: contracts are pure")
{
    const char* mm = "metamodel m { class A { attr n : Int; op f() : Int; } }";
    for (const char* body : {"A.new() == self", "self.f() > 0", "self.trace(\"x\") == void"}) {
        std::string inv = std::string("package m; require \"m.mm\"; aspect class A { inv i : ") + body + " }";
        try {
            testing::weave({{"m.mm", mm}, {"c.inv", inv}});
            FAIL("expected a purity error for " << body);
        } catch (const DiagnosticError& e) {
            CHECK_MESSAGE(e.has_code("PurityError"), body);
        }
    }
    CHECK_NOTHROW(testing::weave(
        {{"m.mm", mm}, {"c.inv", "package m; require \"m.mm\"; aspect class A { inv i : self.container() == void }"}}));
}

TEST_CASE("check_invariant: classifier invariant on both classifier kinds")
{
    Fixture fx;
    const FlatInvariant& inv = fx.inv("CreateObjectAction", "fUML_is_class");
    {
        ModelInstance m = fx.model("create_object_ok.model");
        CheckResult r = check_invariant(inv, *m.find("o3"), m);
        CHECK(r.holds());
    }
    {
        ModelInstance m = fx.model("create_object_violated.model");
        CheckResult r = check_invariant(inv, *m.find("o3"), m);
        CHECK(r.status == CheckResult::Status::Violated);
        CHECK(r.invariant == "fUML_is_class");
        CHECK(r.object_id == "o3");
        CHECK(r.owner == "CreateObjectAction");
    }
}

TEST_CASE("check_invariant: trivial invariant and captured faults")
{
    const char* mm = "metamodel m { class A { attr n : Int; ref next : A [0..1]; } }";
    auto wm = testing::weave({{"m.mm", mm},
                              {"c.inv", R"(package m; require "m.mm";
                                aspect class A {
                                  inv always : true
                                  inv ratio : 10 / self.n > 1
                                  inv nav : self.next.asType(A) == void or self.next.n >= 0
                                })"}});
    ModelInstance m(*wm);
    ObjRef a = m.create("A");
    const auto& flat = wm->at("A").flat_invariants;
    REQUIRE(flat.size() == 3);
    CHECK(check_invariant(flat[0], a, m).holds());
    CheckResult r = check_invariant(flat[1], a, m);
    CHECK(r.status == CheckResult::Status::Error);
    CHECK(r.message.find("DivisionByZero") != std::string::npos);
    CHECK(check_invariant(flat[2], a, m).holds());
}

TEST_CASE("property: check results are deterministic and side-effect free")
{
    Fixture fx;
    for (const char* f : {"work_session.model", "create_object_ok.model", "create_object_violated.model"}) {
        ModelInstance m = fx.model(f);
        const ModelInstance before = m;
        auto first = check_model(m);
        for (int i = 0; i < 5; ++i) {
            auto again = check_model(m);
            REQUIRE(again.size() == first.size());
            for (std::size_t k = 0; k < first.size(); ++k) {
                CHECK(again[k].status == first[k].status);
                CHECK(again[k].invariant == first[k].invariant);
                CHECK(again[k].object_id == first[k].object_id);
            }
        }
        CHECK(m == before);
    }
}

TEST_CASE("property: an invariant on C is checked on every subclass instance")
{
    const char* mm = R"(metamodel m {
        class C { attr n : Int; }
        class D extends C {}
        class E extends D {}
        class F {}
    })";
    auto wm = testing::weave(
        {{"m.mm", mm}, {"c.inv", "package m; require \"m.mm\"; aspect class C { inv small : self.n < 5 }"}});
    ModelInstance m(*wm);
    testing::Rng rng(31);
    for (int i = 0; i < 100; ++i) {
        const char* cls = rng.pick(std::vector<const char*>{"C", "D", "E", "F"});
        ObjRef o = m.create(cls);
        int n = rng.range(0, 9);
        if (std::string(cls) != "F")
            m.set(o, "n", n);
        int checked = 0;
        for (const auto& r : check_model(m))
            if (r.object == o) {
                ++checked;
                CHECK(r.holds() == (n < 5));
            }
        CHECK(checked == (std::string(cls) == "F" ? 0 : 1));
    }
}
