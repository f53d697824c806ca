#include "mashup/interpreter.hpp"

#include "support.hpp"

#include <doctest.h>

#include <functional>
#include <set>

using namespace mashup;

namespace {

const char* kStore = R"(metamodel store {
  class Folder {
    attr name : String;
    ref items : Item [*] containment opposite folder;
    ref sub : Folder [*] containment opposite parent;
    ref parent : Folder [0..1] opposite sub;
    ref owner : Person [0..1] opposite owned;
  }
  class Item { attr size : Int; ref folder : Folder [0..1] opposite items; ref related : Item [*]; }
  class Person { attr age : Int; ref owned : Folder [*] opposite owner; ref favourite : Item [0..1]; }
})";

std::unique_ptr<WovenModel> store()
{
    return testing::weave({{"store.mm", kStore}});
}

std::set<std::string> ids(const ModelInstance& m, const Value& v)
{
    std::set<std::string> out;
    if (v.is_collection())
        for (const auto& i : v.as_collection().items)
            out.insert(m.id_of(i.as_object()));
    else if (v.is_object())
        out.insert(m.id_of(v.as_object()));
    return out;
}

FaultKind fault_of(const std::function<void()>& f)
{
    try {
        f();
    } catch (const Fault& e) {
        return e.kind();
    }
    FAIL("expected a fault");
    return FaultKind::Raised;
}

// Shadow of the store relations, maintained without touching ModelInstance.
struct Shadow {
    std::map<std::string, std::string> item_folder, folder_parent, folder_owner;

    bool is_ancestor(const std::string& anc, std::string f) const
    {
        while (true) {
            if (f == anc)
                return true;
            auto it = folder_parent.find(f);
            if (it == folder_parent.end() || it->second.empty())
                return false;
            f = it->second;
        }
    }
};

void check_against(const ModelInstance& m, const Shadow& s)
{
    for (ObjRef r : m.all()) {
        const std::string& id = m.id_of(r);
        const std::string& cls = m.class_of(r).name;
        if (cls == "Item") {
            auto it = s.item_folder.find(id);
            std::string want = it == s.item_folder.end() ? "" : it->second;
            CHECK(ids(m, m.get(r, "folder")) == (want.empty() ? std::set<std::string>{} : std::set<std::string>{want}));
            auto c = m.container_of(r);
            CHECK((c ? m.id_of(*c) : std::string()) == want);
        } else if (cls == "Folder") {
            std::set<std::string> items, subs;
            for (const auto& [i, f] : s.item_folder)
                if (f == id)
                    items.insert(i);
            for (const auto& [c, p] : s.folder_parent)
                if (p == id)
                    subs.insert(c);
            CHECK(ids(m, m.get(r, "items")) == items);
            CHECK(ids(m, m.get(r, "sub")) == subs);
            auto p = s.folder_parent.find(id);
            std::string want = p == s.folder_parent.end() ? "" : p->second;
            auto c = m.container_of(r);
            CHECK((c ? m.id_of(*c) : std::string()) == want);
            auto o = s.folder_owner.find(id);
            CHECK(ids(m, m.get(r, "owner"))
                  == (o == s.folder_owner.end() || o->second.empty() ? std::set<std::string>{}
                                                                     : std::set<std::string>{o->second}));
        } else {
            std::set<std::string> owned;
            for (const auto& [f, p] : s.folder_owner)
                if (p == id)
                    owned.insert(f);
            CHECK(ids(m, m.get(r, "owned")) == owned);
        }
    }
}

// Random mutation on the store metamodel, mirrored into the shadow; faults
// the shadow predicts are checked on the spot.
void random_step(testing::Rng& rng, ModelInstance& m, Shadow& s, std::vector<ObjRef> (&by)[3])
{
    auto pick = [&](int k) { return rng.pick(by[k]); };
    int op = rng.range(0, 9);
    if (op == 0 || by[0].empty() || by[1].empty() || by[2].empty()) {
        static const char* classes[] = {"Folder", "Item", "Person"};
        int k = rng.range(0, 2);
        by[k].push_back(m.create(classes[k]));
        return;
    }
    ObjRef f = pick(0), i = pick(1), p = pick(2);
    std::string fid = m.id_of(f), iid = m.id_of(i), pid = m.id_of(p);
    switch (op) {
    case 1:
        m.set(i, "folder", f);
        s.item_folder[iid] = fid;
        break;
    case 2:
        m.add(f, "items", i);
        s.item_folder[iid] = fid;
        break;
    case 3:
        m.remove(f, "items", i);
        if (s.item_folder[iid] == fid)
            s.item_folder[iid].clear();
        break;
    case 4:
        m.set(i, "folder", Value());
        s.item_folder[iid].clear();
        break;
    case 5: {
        ObjRef g = pick(0);
        std::string gid = m.id_of(g);
        if (s.is_ancestor(fid, gid)) {
            CHECK(fault_of([&] { m.set(f, "parent", g); }) == FaultKind::ContainmentCycle);
        } else {
            m.set(f, "parent", g);
            s.folder_parent[fid] = gid;
        }
        break;
    }
    case 6:
        m.add(p, "owned", f);
        s.folder_owner[fid] = pid;
        break;
    case 7:
        m.set(f, "owner", rng.coin() ? Value(p) : Value());
        s.folder_owner[fid] = m.get(f, "owner").is_void() ? std::string() : pid;
        break;
    case 8:
        if (s.item_folder[iid].empty() || s.item_folder[iid] == fid) {
            m.add(i, "folder", f);
            s.item_folder[iid] = fid;
        } else {
            CHECK(fault_of([&] { m.add(i, "folder", f); }) == FaultKind::UpperBoundExceeded);
        }
        break;
    default:
        m.set(f, "parent", Value());
        s.folder_parent[fid].clear();
        break;
    }
}

} // namespace

TEST_CASE("create_instance: defaults and abstract classes")
{
    auto lang = testing::fuml();
    ModelInstance m(lang->woven);
    ObjRef a = create_instance(m, "Activity");
    CHECK(m.id_of(a) == "o1");
    CHECK(m.get(a, "name") == Value(""));
    CHECK(m.get(a, "finished") == Value(false));
    CHECK(m.get(a, "node").as_collection().items.empty());
    CHECK(m.get(a, "node").as_collection().kind == CollKind::OrderedSet);
    ObjRef pin = create_instance(m, "Pin");
    CHECK(m.get(pin, "lower") == Value(0));
    CHECK(m.get(pin, "activity").is_void());
    CHECK(fault_of([&] { create_instance(m, "ActivityNode"); }) == FaultKind::AbstractInstantiation);
    CHECK(fault_of([&] { create_instance(m, "Nope"); }) == FaultKind::UnknownClass);
    CHECK(fault_of([&] { m.get(a, "nope"); }) == FaultKind::UnknownFeature);
    CHECK(fault_of([&] { m.set(a, "name", 3); }) == FaultKind::TypeFault);
}

TEST_CASE("set_feature: opposites stay in sync")
{
    auto wm = store();
    ModelInstance m(*wm);
    ObjRef f1 = m.create("Folder"), f2 = m.create("Folder"), i = m.create("Item"), p = m.create("Person");
    m.set(i, "folder", f1);
    CHECK(ids(m, m.get(f1, "items")) == std::set<std::string>{m.id_of(i)});
    CHECK(m.container_of(i) == f1);
    m.add(f2, "items", i);
    CHECK(m.get(f1, "items").as_collection().items.empty());
    CHECK(m.get(i, "folder") == Value(f2));
    CHECK(m.container_of(i) == f2);
    m.remove(f2, "items", i);
    CHECK(m.get(i, "folder").is_void());
    CHECK_FALSE(m.container_of(i));
    m.set(f1, "owner", p);
    m.set(f2, "owner", p);
    CHECK(m.get(p, "owned").as_collection().items.size() == 2);
    m.set(f1, "owner", Value());
    CHECK(ids(m, m.get(p, "owned")) == std::set<std::string>{m.id_of(f2)});
    CHECK(check_conformance(m).empty());
}

TEST_CASE("set_feature: containment re-parents and refuses cycles")
{
    auto wm = store();
    ModelInstance m(*wm);
    ObjRef a = m.create("Folder"), b = m.create("Folder"), c = m.create("Folder");
    m.add(a, "sub", b);
    m.add(b, "sub", c);
    CHECK(m.roots() == std::vector<ObjRef>{a});
    m.add(a, "sub", c);
    CHECK(m.get(b, "sub").as_collection().items.empty());
    CHECK(m.container_of(c) == a);
    CHECK(fault_of([&] { m.add(c, "sub", a); }) == FaultKind::ContainmentCycle);
    CHECK(fault_of([&] { m.set(a, "parent", a); }) == FaultKind::ContainmentCycle);
    // A refused set leaves the old link in place.
    CHECK(fault_of([&] { m.set(c, "parent", c); }) == FaultKind::ContainmentCycle);
    CHECK(m.container_of(c) == a);
    CHECK(fault_of([&] { m.set(c, "sub", Collection{CollKind::OrderedSet, {a}}); }) == FaultKind::ContainmentCycle);
    CHECK(m.container_of(c) == a);
    CHECK(check_conformance(m).empty());
}

TEST_CASE("invoke: diamond rename dispatch")
{
    auto lang = load_language(testing::fixture("diamond/diamond_renamed.mashup"));
    ModelInstance m = load_model_file(testing::fixture("diamond/d.model"), *lang);
    Interpreter interp(m);
    ObjRef d = *m.find("o1");
    CHECK(interp.invoke(d, "run") == Value("B"));
    CHECK(interp.invoke(d, "runC") == Value("C"));
    CHECK(interp.trace().node_labels() == std::vector<std::string>{"B.run", "C.run"});
    CHECK(interp.trace().well_nested());
    CHECK(fault_of([&] { interp.invoke(d, "nope"); }) == FaultKind::NoSuchMethod);
}

TEST_CASE("invoke: super calls, locals and loops")
{
    auto wm = testing::weave({{"m.mm", "metamodel m { class A { attr n : Int; } class B extends A {} }"},
                              {"m.act", R"(package m; require "m.mm";
        aspect class A {
          operation sum(k : Int) : Int is do
            var acc : Int init 0
            from var i : Int init 1 until i > k loop acc := acc + i i := i + 1 end
            return acc
          end
          operation tag() : String is do return "A" end
        }
        aspect class B {
          method sum(k : Int) : Int is do return super(k) * 2 end
          method tag() : String is do return super[A]() + "B" + self.n end
        })"}});
    ModelInstance m(*wm);
    ObjRef b = m.create("B");
    m.set(b, "n", 7);
    Interpreter interp(m);
    CHECK(interp.invoke(b, "sum", {Value(4)}) == Value(20));
    CHECK(interp.invoke(b, "tag") == Value("AB7"));
    CHECK(fault_of([&] { interp.invoke(b, "sum"); }) == FaultKind::TypeFault);
}

TEST_CASE("invoke: precondition and postcondition enforcement")
{
    auto wm = testing::weave({{"m.mm", "metamodel m { class A { attr n : Int; op f(x : Int) : Int; } }"},
                              {"m.inv", R"(package m; require "m.mm";
        aspect class A { pre positive on f : x > 0 post bounded on f : result < 10 inv small : self.n < 3 })"},
                              {"m.act", R"(package m; require "m.mm";
        aspect class A { method f(x : Int) : Int is do self.n := x return x end })"}});
    ModelInstance m(*wm);
    ObjRef a = m.create("A");
    {
        Interpreter interp(m);
        CHECK(interp.invoke(a, "f", {Value(2)}) == Value(2));
        CHECK(fault_of([&] { interp.invoke(a, "f", {Value(0)}); }) == FaultKind::PreconditionViolation);
        CHECK(fault_of([&] { interp.invoke(a, "f", {Value(12)}); }) == FaultKind::PostconditionViolation);
        bool seen = false;
        for (const auto& e : interp.trace().events)
            seen |= e.kind == TraceEvent::Kind::ContractViolation && e.detail == "pre positive @ o1";
        CHECK(seen);
    }
    {
        RuntimeOptions o;
        o.policy = ContractPolicy::Full;
        Interpreter interp(m, o);
        CHECK(fault_of([&] { interp.invoke(a, "f", {Value(5)}); }) == FaultKind::InvariantViolation);
    }
    {
        RuntimeOptions o;
        o.policy = ContractPolicy::Off;
        Interpreter interp(m, o);
        CHECK(interp.invoke(a, "f", {Value(-4)}) == Value(-4));
    }
}

TEST_CASE("invoke: runtime faults")
{
    auto wm = testing::weave({{"m.mm", "metamodel m { class A { attr n : Int; ref next : A [0..1]; } }"},
                              {"m.act", R"(package m; require "m.mm";
        aspect class A {
          operation div() : Int is do return 10 / self.n end
          operation hop() : Int is do return self.next.div() end
          operation peek() : Boolean is do return self.next.next == void end
          operation boom() is do raise "bad state" end
          operation deep(k : Int) : Int is do return self.deep(k + 1) end
        })"}});
    ModelInstance m(*wm);
    ObjRef a = m.create("A");
    Interpreter interp(m);
    CHECK(fault_of([&] { interp.invoke(a, "div"); }) == FaultKind::DivisionByZero);
    CHECK(fault_of([&] { interp.invoke(a, "hop"); }) == FaultKind::VoidInvocation);
    CHECK(interp.invoke(a, "peek") == Value(true));
    CHECK(fault_of([&] { interp.invoke(a, "boom"); }) == FaultKind::Raised);
    CHECK(fault_of([&] { interp.invoke(a, "deep", {Value(0)}); }) == FaultKind::Raised);
}

TEST_CASE("load/save: fixture counts, empty model and errors")
{
    auto lang = testing::fuml();
    ModelInstance ws = load_model_file(testing::fixture("models/work_session.model"), *lang);
    int activities = 0, nodes = 0, edges = 0;
    for (ObjRef r : ws.all()) {
        const WovenClass& c = ws.class_of(r);
        activities += c.is_kind_of("Activity");
        nodes += c.is_kind_of("ActivityNode");
        edges += c.is_kind_of("ActivityEdge");
    }
    CHECK(activities == 1);
    CHECK(nodes == 7);
    CHECK(edges == 7);
    CHECK(ws.roots().size() == 1);
    CHECK(ws.get(*ws.find("o9"), "source").is_object());

    ModelInstance empty = load_model(R"({"conformsTo": "fuml", "objects": []})", lang->woven);
    CHECK(empty.size() == 0);
    CHECK(save_model(empty) == save_model(ModelInstance(lang->woven)));

    auto stage_code = [&](const std::string& text) -> std::pair<Stage, std::string> {
        try {
            load_model(text, lang->woven, "x.model");
        } catch (const DiagnosticError& e) {
            return {e.stage(), e.diagnostics()[0].code};
        }
        return {Stage::Parse, "none"};
    };
    CHECK(stage_code("{\"objects\": [").first == Stage::Parse);
    CHECK(stage_code(R"({"objects": [{"id": "o1", "class": "Activity", "slots": {"node": ["@o9"]}}]})")
          == std::pair<Stage, std::string>{Stage::Conformance, "ResolutionError"});
    CHECK(stage_code(R"({"objects": [{"id": "o1", "class": "ActivityNode"}]})")
          == std::pair<Stage, std::string>{Stage::Conformance, "AbstractInstantiation"});
    CHECK(stage_code(R"({"objects": [{"id": "o1", "class": "Activity", "slots": {"bogus": 1}}]})")
          == std::pair<Stage, std::string>{Stage::Conformance, "UnknownFeature"});
    CHECK(stage_code(R"({"objects": [{"id": "o1", "class": "Activity"}, {"id": "o1", "class": "Activity"}]})")
          == std::pair<Stage, std::string>{Stage::Conformance, "DuplicateId"});
}

TEST_CASE("load: a containment cycle is refused")
{
    auto wm = store();
    auto code = [&](const std::string& text) {
        try {
            load_model(text, *wm);
        } catch (const DiagnosticError& e) {
            CHECK(e.stage() == Stage::Conformance);
            return e.diagnostics()[0].code;
        }
        return std::string("none");
    };
    CHECK(code(R"({"objects": [{"id": "a", "class": "Folder", "slots": {"sub": ["@b"]}},
                               {"id": "b", "class": "Folder", "slots": {"sub": ["@a"]}}]})")
          == "ContainmentCycle");
    CHECK(code(R"({"objects": [{"id": "a", "class": "Folder", "slots": {"sub": ["@a"]}}]})") == "ContainmentCycle");
    CHECK(code(R"({"objects": [{"id": "a", "class": "Folder", "slots": {"sub": ["@c"]}},
                               {"id": "b", "class": "Folder", "slots": {"sub": ["@c"]}},
                               {"id": "c", "class": "Folder"}]})")
          == "OppositeMismatch");
}

TEST_CASE("check_model: ordered by object id")
{
    auto lang = testing::fuml();
    ModelInstance m = load_model_file(testing::fixture("models/create_object_violated.model"), *lang);
    auto results = check_model(m);
    REQUIRE_FALSE(results.empty());
    for (std::size_t k = 1; k < results.size(); ++k)
        CHECK(results[k - 1].object_id <= results[k].object_id);
    int violated = 0;
    for (const auto& r : results)
        violated += r.status == CheckResult::Status::Violated;
    CHECK(violated == 1);
}

TEST_CASE("property: random set/add/remove keeps the graph coherent")
{
    auto wm = store();
    testing::Rng rng(61);
    for (int round = 0; round < 20; ++round) {
        ModelInstance m(*wm);
        Shadow s;
        std::vector<ObjRef> by[3];
        for (int step = 0; step < 150; ++step) {
            random_step(rng, m, s, by);
            REQUIRE(check_conformance(m).empty());
        }
        check_against(m, s);
    }
}

TEST_CASE("property: dispatch and execution are deterministic")
{
    auto lang = testing::fuml();
    for (const char* f : {"work_session.model", "linear_chain.model", "hilbert_d3.model"}) {
        ModelInstance base = load_model_file(testing::fixture(std::string("models/") + f), *lang);
        Trace first;
        for (int rep = 0; rep < 3; ++rep) {
            ModelInstance m = base;
            Interpreter interp(m);
            interp.invoke(*m.find("o1"), "execute");
            if (rep == 0)
                first = interp.trace();
            else
                CHECK(interp.trace() == first);
            CHECK(interp.trace().well_nested());
        }
    }
}

TEST_CASE("property: preconditions are OR'ed across levels, postconditions AND'ed")
{
    auto wm = testing::weave({{"m.mm", "metamodel m { class A { op f(x : Int) : Int; op g(x : Int) : Int; } class B extends A {} }"},
                              {"m.inv", R"(package m; require "m.mm";
        aspect class A { pre pa on f : x > 0 post qa on g : result > 0 }
        aspect class B { pre pb on f : x < -10 pre pb2 on f : x > -100 post qb on g : result < 100 })"},
                              {"m.act", R"(package m; require "m.mm";
        aspect class A { method f(x : Int) : Int is do return x end method g(x : Int) : Int is do return x end })"}});
    ModelInstance m(*wm);
    ObjRef b = m.create("B"), a = m.create("A");
    Interpreter interp(m);
    testing::Rng rng(62);
    for (int i = 0; i < 400; ++i) {
        int x = rng.range(-150, 150);
        bool pre_b = (x < -10 && x > -100) || x > 0;
        if (pre_b)
            CHECK(interp.invoke(b, "f", {Value(x)}) == Value(x));
        else
            CHECK(fault_of([&] { interp.invoke(b, "f", {Value(x)}); }) == FaultKind::PreconditionViolation);
        if (x > 0)
            CHECK(interp.invoke(a, "f", {Value(x)}) == Value(x));
        else
            CHECK(fault_of([&] { interp.invoke(a, "f", {Value(x)}); }) == FaultKind::PreconditionViolation);
        if (x > 0 && x < 100)
            CHECK(interp.invoke(b, "g", {Value(x)}) == Value(x));
        else
            CHECK(fault_of([&] { interp.invoke(b, "g", {Value(x)}); }) == FaultKind::PostconditionViolation);
    }
}

TEST_CASE("property: save/load round-trips random models")
{
    auto wm = store();
    testing::Rng rng(63);
    for (int round = 0; round < 60; ++round) {
        ModelInstance m(*wm);
        Shadow s;
        std::vector<ObjRef> by[3];
        for (int step = 0; step < rng.range(0, 60); ++step)
            random_step(rng, m, s, by);
        for (ObjRef r : m.all()) {
            const std::string& cls = m.class_of(r).name;
            if (cls == "Item")
                m.set(r, "size", rng.range(-5, 5));
            else if (cls == "Folder")
                m.set(r, "name", std::string(static_cast<std::size_t>(rng.range(0, 3)), 'x'));
        }
        std::string text = save_model(m);
        ModelInstance back = load_model(text, *wm);
        CHECK(isomorphic(m, back));
        CHECK(save_model(back) == text);
    }
}
