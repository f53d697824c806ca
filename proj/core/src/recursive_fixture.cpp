#include "mashup/recursive_fixture.hpp"

#include <json.hpp>

#include <stdexcept>
#include <string_view>
#include <utility>

namespace mashup {

namespace {

using nlohmann::json;

class Builder {
public:
    Builder()
    {
        activity_ = add("Activity");
        objects_[0]["slots"]["name"] = "Hilbert";
        objects_[0]["slots"]["node"] = json::array();
        objects_[0]["slots"]["edge"] = json::array();
    }

    std::string node(const char* cls, const std::string& name = {})
    {
        std::string id = add(cls);
        if (std::string_view(cls) == "OpaqueAction")
            ++actions;
        if (!name.empty())
            objects_.back()["slots"]["name"] = name;
        objects_[0]["slots"]["node"].push_back("@" + id);
        return id;
    }

    void edge(const std::string& from, const std::string& to)
    {
        std::string id = add("ControlFlow");
        objects_.back()["slots"]["source"] = "@" + from;
        objects_.back()["slots"]["target"] = "@" + to;
        objects_[0]["slots"]["edge"].push_back("@" + id);
    }

    // Returns the entry and exit node of the region.
    std::pair<std::string, std::string> region(char symbol, int level)
    {
        if (level == 0) {
            std::string a = node("OpaqueAction", std::string(1, symbol));
            return {a, a};
        }
        std::string_view rule = symbol == 'A' ? "+BF-AFA-FB+" : "-AF+BFB+FA-";
        std::string fork = node("ForkNode");
        std::string join = node("JoinNode");
        std::string marker = node("OpaqueAction", "level " + std::to_string(level));
        edge(fork, marker);
        edge(marker, join);
        std::string prev = fork;
        for (char c : rule) {
            if (c == 'A' || c == 'B') {
                std::string call = node("OpaqueAction", std::string("call ") + c);
                edge(prev, call);
                auto [in, out] = region(c, level - 1);
                edge(call, in);
                prev = out;
            } else {
                std::string a = node("OpaqueAction", std::string(1, c));
                edge(prev, a);
                prev = a;
            }
        }
        edge(prev, join);
        return {fork, join};
    }

    std::size_t size() const { return objects_.size(); }

    std::size_t actions = 0;

    std::string dump() const
    {
        json doc;
        doc["conformsTo"] = "fuml";
        doc["objects"] = objects_;
        doc["roots"] = json::array({"@" + activity_});
        return doc.dump(2) + "\n";
    }

private:
    std::string add(const char* cls)
    {
        std::string id = "o" + std::to_string(objects_.size() + 1);
        objects_.push_back({{"id", id}, {"class", cls}, {"slots", json::object()}});
        return id;
    }

    json objects_ = json::array();
    std::string activity_;
};

std::size_t pow4(int d)
{
    std::size_t p = 1;
    for (int i = 0; i < d; ++i)
        p *= 4;
    return p;
}

} // namespace

std::size_t recursive_action_count(int depth)
{
    return 5 * pow4(depth) - 4;
}

std::size_t recursive_element_count(int depth)
{
    return 5 + pow4(depth) + 32 * (pow4(depth) - 1) / 3;
}

RecursiveFixture generate_recursive_fixture(int depth)
{
    if (depth < 0 || depth > 8)
        throw std::invalid_argument("depth must be between 0 and 8");
    Builder b;
    std::string initial = b.node("InitialNode");
    auto [in, out] = b.region('A', depth);
    std::string final_node = b.node("FinalNode");
    b.edge(initial, in);
    b.edge(out, final_node);

    RecursiveFixture f;
    f.depth = depth;
    f.elements = b.size();
    f.actions = b.actions;
    f.model_json = b.dump();
    return f;
}

} // namespace mashup
