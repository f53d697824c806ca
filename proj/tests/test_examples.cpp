#include "mashup/recursive_fixture.hpp"

#include "support.hpp"

#include <doctest.h>

#include <map>
#include <set>

using namespace mashup;

namespace {

std::vector<std::string> run_labels(const Language& lang, const std::string& model, TieBreak tb)
{
    ModelInstance m = load_model_file(testing::fixture("models/" + model), lang);
    RuntimeOptions o;
    o.tiebreak = tb;
    Interpreter interp(m, o);
    interp.invoke(m.roots().front(), "execute");
    return interp.trace().node_labels();
}

// Random series-parallel activity built through the model API.
struct Builder {
    ModelInstance& m;
    ObjRef activity;
    testing::Rng& rng;
    int actions = 0;
    std::vector<std::pair<ObjRef, ObjRef>> flows;

    ObjRef node(const char* cls, const std::string& name = {})
    {
        ObjRef n = m.create(cls);
        m.set(n, "name", name);
        m.add(activity, "node", n);
        return n;
    }

    void edge(ObjRef from, ObjRef to)
    {
        ObjRef e = m.create("ControlFlow");
        m.add(activity, "edge", e);
        m.set(e, "source", from);
        m.set(e, "target", to);
        flows.emplace_back(from, to);
    }

    // Returns entry and exit of a region.
    std::pair<ObjRef, ObjRef> region(int depth)
    {
        int kind = depth <= 0 ? 0 : rng.range(0, 2);
        if (kind == 0) {
            ObjRef a = node("OpaqueAction", "a" + std::to_string(actions++));
            return {a, a};
        }
        if (kind == 1) {
            auto first = region(depth - 1);
            auto second = region(depth - 1);
            edge(first.second, second.first);
            return {first.first, second.second};
        }
        ObjRef fork = node("ForkNode"), join = node("JoinNode");
        int branches = rng.range(2, 3);
        for (int b = 0; b < branches; ++b) {
            auto br = region(depth - 1);
            edge(fork, br.first);
            edge(br.second, join);
        }
        return {fork, join};
    }
};

} // namespace

TEST_CASE("every fixture language composes or fails as intended")
{
    for (const char* ok : {"fuml-lite/fuml.mashup", "diamond/diamond_renamed.mashup"})
        CHECK_NOTHROW(load_language(testing::fixture(ok)));
    for (const char* bad : {"diamond/diamond.mashup", "case2/case2.mashup"}) {
        try {
            load_language(testing::fixture(bad));
            FAIL("expected composition to fail: " << bad);
        } catch (const DiagnosticError& e) {
            CHECK(e.stage() == Stage::Composition);
        }
    }
    auto lang = testing::fuml();
    for (const char* m : {"work_session.model", "work_session_truncated.model", "linear_chain.model",
                          "no_initial.model", "create_object_ok.model", "create_object_violated.model",
                          "hilbert_d3.model"})
        CHECK_NOTHROW(load_model_file(testing::fixture(std::string("models/") + m), *lang));
}

TEST_CASE("fUML-lite: execution orders")
{
    auto lang = testing::fuml();
    CHECK(run_labels(*lang, "work_session.model", TieBreak::Ascending)
          == std::vector<std::string>{"Have a coffee", "Talk", "Work"});
    CHECK(run_labels(*lang, "work_session.model", TieBreak::Descending)
          == std::vector<std::string>{"Talk", "Have a coffee", "Work"});
    CHECK(run_labels(*lang, "linear_chain.model", TieBreak::Ascending) == std::vector<std::string>{"Only"});
    // Without the fork->talk edge the join never fires.
    CHECK(run_labels(*lang, "work_session_truncated.model", TieBreak::Ascending)
          == std::vector<std::string>{"Have a coffee"});
}

TEST_CASE("fUML-lite: the activity finishes and leaves no tokens")
{
    auto lang = testing::fuml();
    ModelInstance m = load_model_file(testing::fixture("models/work_session.model"), *lang);
    RuntimeOptions o;
    o.policy = ContractPolicy::Full;
    Interpreter interp(m, o);
    interp.invoke(*m.find("o1"), "execute");
    CHECK(m.get(*m.find("o1"), "finished") == Value(true));
    for (const auto& v : m.get(*m.find("o1"), "node").as_collection().items)
        CHECK(m.get(v.as_object(), "tokens") == Value(0));
}

TEST_CASE("property: random fork/join activities respect control flow under both tiebreaks")
{
    auto lang = testing::fuml();
    testing::Rng rng(71);
    for (int round = 0; round < 60; ++round) {
        ModelInstance base(lang->woven);
        ObjRef act = base.create("Activity");
        Builder b{base, act, rng, 0, {}};
        ObjRef init = b.node("InitialNode"), fin = b.node("FinalNode");
        auto body = b.region(rng.range(1, 4));
        b.edge(init, body.first);
        b.edge(body.second, fin);

        // Reachability over control flows, computed independently.
        std::map<std::string, std::set<std::string>> reach;
        std::map<std::uint32_t, std::vector<ObjRef>> succ;
        for (const auto& [f, t] : b.flows)
            succ[f.index].push_back(t);
        for (const Value& v : base.get(act, "node").as_collection().items) {
            ObjRef start = v.as_object();
            std::vector<ObjRef> stack{start};
            std::set<std::uint32_t> seen;
            while (!stack.empty()) {
                ObjRef cur = stack.back();
                stack.pop_back();
                for (ObjRef n : succ[cur.index])
                    if (seen.insert(n.index).second) {
                        stack.push_back(n);
                        reach[base.get(start, "name").as_string()].insert(base.get(n, "name").as_string());
                    }
            }
        }

        std::set<std::set<std::string>> executed_sets;
        for (TieBreak tb : {TieBreak::Ascending, TieBreak::Descending}) {
            ModelInstance m = base;
            RuntimeOptions o;
            o.tiebreak = tb;
            o.record_calls = false;
            Interpreter interp(m, o);
            interp.invoke(act, "execute");
            auto labels = interp.trace().node_labels();
            REQUIRE(labels.size() == static_cast<std::size_t>(b.actions));
            CHECK(std::set<std::string>(labels.begin(), labels.end()).size() == labels.size());
            std::map<std::string, std::size_t> at;
            for (std::size_t k = 0; k < labels.size(); ++k)
                at[labels[k]] = k;
            for (const auto& [from, tos] : reach)
                for (const auto& to : tos)
                    if (at.count(from) && at.count(to))
                        CHECK(at[from] < at[to]);
            CHECK(m.get(act, "finished") == Value(true));
            executed_sets.insert(std::set<std::string>(labels.begin(), labels.end()));
        }
        CHECK(executed_sets.size() == 1);
    }
}

TEST_CASE("recursive fixture: closed forms and execution count")
{
    auto lang = testing::fuml();
    for (int d = 0; d <= 3; ++d) {
        std::size_t p = std::size_t{1} << (2 * d); // 4^d
        std::size_t elements = 5 + p + 32 * (p - 1) / 3;
        std::size_t actions = 5 * p - 4;
        CHECK(recursive_element_count(d) == elements);
        CHECK(recursive_action_count(d) == actions);
        RecursiveFixture fx = generate_recursive_fixture(d);
        CHECK(fx.elements == elements);
        CHECK(fx.actions == actions);
        ModelInstance m = load_model(fx.model_json, lang->woven);
        CHECK(m.size() == elements);
        RuntimeOptions o;
        o.record_calls = false;
        Interpreter interp(m, o);
        interp.invoke(*m.find("o1"), "execute");
        CHECK(interp.trace().node_labels().size() == actions);
    }
    CHECK(recursive_element_count(3) == 741);
    CHECK(testing::slurp(testing::fixture("models/hilbert_d3.model")) == generate_recursive_fixture(3).model_json);
    CHECK_THROWS(generate_recursive_fixture(-1));
    CHECK_THROWS(generate_recursive_fixture(9));
}
