#include "mashup/model.hpp"

#include <json.hpp>

#include <algorithm>
#include <functional>
#include <map>
#include <set>
#include <stdexcept>

namespace mashup {

using json = nlohmann::json;

Value default_value(const WovenFeature& f)
{
    if (f.multiplicity.many)
        return Collection{f.is_reference ? CollKind::OrderedSet : CollKind::Sequence, {}};
    if (f.is_reference)
        return VoidValue{};
    switch (f.type) {
    case PrimitiveType::Int: return std::int64_t{0};
    case PrimitiveType::Bool: return false;
    case PrimitiveType::String: return std::string();
    }
    return VoidValue{};
}

ObjRef ModelInstance::create(std::string_view class_name, std::string id)
{
    const WovenClass* wc = wm_->find(class_name);
    if (!wc)
        throw Fault(FaultKind::UnknownClass, "unknown class '" + std::string(class_name) + "'", std::string(class_name));
    if (wc->is_abstract)
        throw Fault(FaultKind::AbstractInstantiation, "cannot instantiate abstract class " + wc->name, wc->name);
    if (id.empty()) {
        do {
            id = "o" + std::to_string(next_id_++);
        } while (ids_.count(id));
    } else if (ids_.count(id)) {
        throw std::invalid_argument("duplicate object id '" + id + "'");
    }
    Obj o;
    o.id = id;
    o.cls = wc;
    o.slots.reserve(wc->features.size());
    for (const auto& f : wc->features)
        o.slots.push_back(default_value(f));
    ObjRef r{static_cast<std::uint32_t>(objects_.size())};
    ids_.emplace(std::move(id), r.index);
    objects_.push_back(std::move(o));
    return r;
}

ObjRef create_instance(ModelInstance& m, std::string_view class_name)
{
    return m.create(class_name);
}

std::optional<ObjRef> ModelInstance::find(std::string_view id) const
{
    auto it = ids_.find(std::string(id));
    if (it == ids_.end())
        return std::nullopt;
    return ObjRef{it->second};
}

std::vector<ObjRef> ModelInstance::all() const
{
    std::vector<ObjRef> out;
    out.reserve(objects_.size());
    for (std::uint32_t i = 0; i < objects_.size(); ++i)
        out.push_back(ObjRef{i});
    return out;
}

std::vector<ObjRef> ModelInstance::roots() const
{
    std::vector<ObjRef> out;
    for (std::uint32_t i = 0; i < objects_.size(); ++i)
        if (!objects_[i].container)
            out.push_back(ObjRef{i});
    return out;
}

std::optional<ObjRef> ModelInstance::container_of(ObjRef r) const
{
    const auto& c = obj(r).container;
    if (!c)
        return std::nullopt;
    return c->owner;
}

std::size_t ModelInstance::slot_of(ObjRef r, std::string_view feature) const
{
    const WovenClass& wc = class_of(r);
    auto slot = wc.feature_slot(feature);
    if (!slot)
        throw Fault(FaultKind::UnknownFeature, "class " + wc.name + " has no feature '" + std::string(feature) + "'",
                    std::string(feature));
    return *slot;
}

const Value& ModelInstance::get(ObjRef r, std::string_view feature) const
{
    return obj(r).slots[slot_of(r, feature)];
}

std::optional<std::size_t> ModelInstance::opposite_slot(ObjRef target, const WovenFeature& f) const
{
    if (!f.opposite)
        return std::nullopt;
    return class_of(target).feature_slot(*f.opposite);
}

namespace {

bool primitive_matches(PrimitiveType t, const Value& v)
{
    switch (t) {
    case PrimitiveType::Int: return v.is_int();
    case PrimitiveType::Bool: return v.is_bool();
    case PrimitiveType::String: return v.is_string();
    }
    return false;
}

std::string describe(const Value& v)
{
    if (v.is_void())
        return "void";
    if (v.is_int())
        return "Integer";
    if (v.is_bool())
        return "Boolean";
    if (v.is_string())
        return "String";
    if (v.is_object())
        return "object";
    return "collection";
}

} // namespace

void ModelInstance::check_element(const WovenFeature& f, const Value& v) const
{
    if (!f.is_reference) {
        if (!primitive_matches(f.type, v))
            throw Fault(FaultKind::TypeFault,
                        "feature '" + f.name + "' holds " + to_string(f.type) + ", not " + describe(v), f.name);
        return;
    }
    if (!v.is_object())
        throw Fault(FaultKind::TypeFault, "feature '" + f.name + "' holds " + f.target + " objects, not " + describe(v),
                    f.name);
    if (v.as_object().index >= objects_.size())
        throw Fault(FaultKind::TypeFault, "dangling object reference", f.name);
    if (!class_of(v.as_object()).is_kind_of(f.target))
        throw Fault(FaultKind::TypeFault,
                    "feature '" + f.name + "' holds " + f.target + " objects, not " + class_of(v.as_object()).name,
                    f.name);
}

Value ModelInstance::coerce(const WovenFeature& f, Value v) const
{
    if (!f.multiplicity.many) {
        if (f.is_reference && v.is_void())
            return v;
        check_element(f, v);
        return v;
    }
    if (!v.is_collection())
        throw Fault(FaultKind::TypeFault, "feature '" + f.name + "' is multi-valued; assign a collection", f.name);
    for (const auto& item : v.as_collection().items)
        check_element(f, item);
    if (f.is_reference)
        return make_collection(CollKind::OrderedSet, std::move(v.as_collection().items));
    return Collection{CollKind::Sequence, std::move(v.as_collection().items)};
}

bool ModelInstance::holds(ObjRef a, std::size_t f, ObjRef b) const
{
    const Value& v = obj(a).slots[f];
    if (v.is_collection())
        return v.as_collection().contains(b);
    return v.is_object() && v.as_object() == b;
}

void ModelInstance::ensure_can_contain(ObjRef owner, ObjRef child) const
{
    if (owner == child)
        throw Fault(FaultKind::ContainmentCycle, "object " + id_of(child) + " cannot contain itself");
    for (auto cur = container_of(owner); cur; cur = container_of(*cur))
        if (*cur == child)
            throw Fault(FaultKind::ContainmentCycle,
                        "containing " + id_of(child) + " in " + id_of(owner) + " would create a containment cycle");
}

void ModelInstance::raw_link(ObjRef a, std::size_t f, ObjRef b)
{
    const WovenFeature& F = feat(a, f);
    auto put = [&](ObjRef x, std::size_t s, ObjRef y) {
        Value& v = objects_[x.index].slots[s];
        if (v.is_collection())
            v.as_collection().insert(y);
        else
            v = y;
    };
    put(a, f, b);
    if (auto os = opposite_slot(b, F)) {
        put(b, *os, a);
        if (feat(b, *os).is_containment)
            objects_[a.index].container = ContainerLink{b, *os};
    }
    if (F.is_containment)
        objects_[b.index].container = ContainerLink{a, f};
}

void ModelInstance::unlink(ObjRef a, std::size_t f, ObjRef b)
{
    const WovenFeature& F = feat(a, f);
    auto drop = [&](ObjRef x, std::size_t s, ObjRef y) {
        Value& v = objects_[x.index].slots[s];
        if (v.is_collection())
            v.as_collection().erase(y);
        else if (v.is_object() && v.as_object() == y)
            v = VoidValue{};
    };
    drop(a, f, b);
    if (F.is_containment && objects_[b.index].container == ContainerLink{a, f})
        objects_[b.index].container.reset();
    if (auto os = opposite_slot(b, F)) {
        drop(b, *os, a);
        if (objects_[a.index].container == ContainerLink{b, *os})
            objects_[a.index].container.reset();
    }
}

void ModelInstance::detach(ObjRef child)
{
    if (auto c = obj(child).container)
        unlink(c->owner, c->feature, child);
}

void ModelInstance::check_link(ObjRef a, std::size_t f, ObjRef b) const
{
    const WovenFeature& F = feat(a, f);
    if (F.is_containment)
        ensure_can_contain(a, b);
    auto os = opposite_slot(b, F);
    if (os && feat(b, *os).is_containment)
        ensure_can_contain(b, a);
}

void ModelInstance::link(ObjRef a, std::size_t f, ObjRef b)
{
    if (holds(a, f, b))
        return;
    check_link(a, f, b);
    const WovenFeature& F = feat(a, f);
    auto os = opposite_slot(b, F);
    if (F.is_containment)
        detach(b);
    if (os && feat(b, *os).is_containment)
        detach(a);
    if (!F.multiplicity.many) {
        const Value cur = obj(a).slots[f];
        if (cur.is_object() && cur.as_object() != b)
            unlink(a, f, cur.as_object());
    }
    if (os && !feat(b, *os).multiplicity.many) {
        const Value cur = obj(b).slots[*os];
        if (cur.is_object() && cur.as_object() != a)
            unlink(b, *os, cur.as_object());
    }
    raw_link(a, f, b);
}

void ModelInstance::set(ObjRef r, std::string_view feature, Value v)
{
    std::size_t slot = slot_of(r, feature);
    const WovenFeature& f = feat(r, slot);
    v = coerce(f, std::move(v));
    if (!f.is_reference) {
        objects_[r.index].slots[slot] = std::move(v);
        return;
    }
    if (!f.multiplicity.many) {
        const Value cur = obj(r).slots[slot];
        if (cur == v)
            return;
        if (v.is_object())
            check_link(r, slot, v.as_object());
        if (cur.is_object())
            unlink(r, slot, cur.as_object());
        if (v.is_object())
            link(r, slot, v.as_object());
        return;
    }
    const Collection& wanted = v.as_collection();
    const Collection old = obj(r).slots[slot].as_collection();
    for (const auto& item : wanted.items)
        if (!old.contains(item))
            check_link(r, slot, item.as_object());
    for (const auto& item : old.items)
        if (!wanted.contains(item))
            unlink(r, slot, item.as_object());
    for (const auto& item : wanted.items)
        link(r, slot, item.as_object());
    // Same members now; adopt the requested order.
    objects_[r.index].slots[slot] = std::move(v);
}

void ModelInstance::add(ObjRef r, std::string_view feature, Value v)
{
    std::size_t slot = slot_of(r, feature);
    const WovenFeature& f = feat(r, slot);
    check_element(f, v);
    if (!f.is_reference) {
        if (!f.multiplicity.many)
            throw Fault(FaultKind::UpperBoundExceeded, "feature '" + f.name + "' holds at most one value", f.name);
        objects_[r.index].slots[slot].as_collection().insert(std::move(v));
        return;
    }
    if (!f.multiplicity.many) {
        const Value& cur = obj(r).slots[slot];
        if (cur == v)
            return;
        if (!cur.is_void())
            throw Fault(FaultKind::UpperBoundExceeded,
                        "feature '" + f.name + "' of " + id_of(r) + " already holds an object", f.name);
    }
    link(r, slot, v.as_object());
}

void ModelInstance::remove(ObjRef r, std::string_view feature, const Value& v)
{
    std::size_t slot = slot_of(r, feature);
    const WovenFeature& f = feat(r, slot);
    if (!f.is_reference) {
        Value& cur = objects_[r.index].slots[slot];
        if (cur.is_collection())
            cur.as_collection().erase(v);
        else if (cur == v)
            cur = default_value(f);
        return;
    }
    if (v.is_object() && holds(r, slot, v.as_object()))
        unlink(r, slot, v.as_object());
}

// ---------------------------------------------------------------------------
// Conformance

std::vector<Diagnostic> check_conformance(const ModelInstance& m, const std::string& unit)
{
    std::vector<Diagnostic> out;
    auto report = [&](std::string code, std::string msg) { out.push_back({unit, {}, std::move(code), std::move(msg)}); };
    auto valid = [&](const Value& v) { return v.is_object() && v.as_object().index < m.size(); };
    auto holds = [&](ObjRef a, std::size_t s, ObjRef b) {
        const Value& v = m.get(a, s);
        return v.is_collection() ? v.as_collection().contains(b) : (v.is_object() && v.as_object() == b);
    };

    std::vector<std::optional<ContainerLink>> owners(m.size());
    for (ObjRef r : m.all()) {
        const Obj& o = m.obj(r);
        const WovenClass& wc = *o.cls;
        const std::string where = o.id + " (" + wc.name + ")";
        if (wc.is_abstract)
            report("AbstractInstantiation", "object " + where + " instantiates an abstract class");
        if (o.slots.size() != wc.features.size()) {
            report("ConformanceError", "object " + where + " has a malformed slot table");
            continue;
        }
        for (std::size_t s = 0; s < wc.features.size(); ++s) {
            const WovenFeature& f = wc.features[s];
            const Value& v = o.slots[s];
            const std::string fname = o.id + "." + f.name;
            std::vector<Value> items;
            if (f.multiplicity.many) {
                if (!v.is_collection()) {
                    report("ConformanceError", fname + " must hold a collection");
                    continue;
                }
                items = v.as_collection().items;
                if (f.is_reference) {
                    std::set<std::uint32_t> seen;
                    for (const auto& i : items)
                        if (i.is_object() && !seen.insert(i.as_object().index).second)
                            report("ConformanceError", fname + " lists an object twice");
                }
            } else if (!v.is_void() || !f.is_reference) {
                items.push_back(v);
            }
            if (static_cast<int>(items.size()) < f.multiplicity.lower)
                report("LowerBoundViolated", fname + " needs at least " + std::to_string(f.multiplicity.lower)
                                                 + " value(s)");
            for (const auto& i : items) {
                if (!f.is_reference) {
                    if (!primitive_matches(f.type, i))
                        report("ConformanceError", fname + " holds " + describe(i) + ", expected " + to_string(f.type));
                    continue;
                }
                if (!valid(i)) {
                    report("ConformanceError", fname + " holds " + describe(i) + ", expected a " + f.target + " object");
                    continue;
                }
                ObjRef t = i.as_object();
                if (!m.class_of(t).is_kind_of(f.target))
                    report("ConformanceError", fname + " refers to " + m.id_of(t) + " of class " + m.class_of(t).name
                                                   + ", expected " + f.target);
                if (f.opposite) {
                    auto os = m.class_of(t).feature_slot(*f.opposite);
                    if (!os || !holds(t, *os, r))
                        report("OppositeMismatch",
                               fname + " refers to " + m.id_of(t) + " but " + m.id_of(t) + "." + *f.opposite
                                   + " does not refer back");
                }
                if (f.is_containment) {
                    if (owners[t.index])
                        report("MultipleContainers", "object " + m.id_of(t) + " is contained twice");
                    else
                        owners[t.index] = ContainerLink{r, s};
                }
            }
        }
    }
    for (ObjRef r : m.all()) {
        if (m.obj(r).container != owners[r.index])
            report("ContainerMismatch", "recorded container of " + m.id_of(r) + " disagrees with the containment slots");
        std::size_t steps = 0;
        for (auto c = owners[r.index]; c; c = owners[c->owner.index]) {
            if (c->owner == r || ++steps > m.size()) {
                report("ContainmentCycle", "object " + m.id_of(r) + " is its own container");
                break;
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// JSON

namespace {

SourcePos pos_of_byte(std::string_view text, std::size_t byte)
{
    SourcePos p{1, 1};
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++p.line;
            p.col = 1;
        } else {
            ++p.col;
        }
    }
    return p;
}

// Position of the `"id": "<id>"` member that declares an object.
SourcePos pos_of_object(std::string_view text, const std::string& id)
{
    if (id.empty())
        return {};
    std::string quoted = json(id).dump();
    std::size_t from = 0;
    while ((from = text.find("\"id\"", from)) != std::string_view::npos) {
        std::size_t p = from + 4;
        while (p < text.size() && (text[p] == ' ' || text[p] == '\t' || text[p] == '\n' || text[p] == '\r' || text[p] == ':'))
            ++p;
        if (text.substr(p, quoted.size()) == quoted)
            return pos_of_byte(text, from);
        from = p;
    }
    return {};
}

json to_json_scalar(const Value& v)
{
    if (v.is_int())
        return v.as_int();
    if (v.is_bool())
        return v.as_bool();
    if (v.is_string())
        return v.as_string();
    return nullptr;
}

} // namespace

ModelInstance load_model(std::string_view text, const WovenModel& wm, const std::string& unit)
{
    json doc;
    try {
        doc = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        std::string msg = e.what();
        if (auto p = msg.find("]: "); p != std::string::npos)
            msg = msg.substr(p + 3);
        throw DiagnosticError(Stage::Parse, {Diagnostic{unit, pos_of_byte(text, e.byte ? e.byte - 1 : 0),
                                                        "SyntaxError", msg}});
    }

    std::vector<Diagnostic> diags;
    std::string at_id;
    auto report = [&](std::string code, std::string msg) {
        diags.push_back({unit, pos_of_object(text, at_id), std::move(code), std::move(msg)});
    };
    auto fail_now = [&](Stage stage) {
        if (!diags.empty())
            throw DiagnosticError(stage, std::move(diags));
    };

    if (!doc.is_object() || !doc.contains("objects") || !doc["objects"].is_array())
        report("SyntaxError", "a model is an object with an \"objects\" array");
    else if (doc.contains("roots") && !doc["roots"].is_array())
        report("SyntaxError", "\"roots\" must be an array");
    else if (doc.contains("conformsTo") && !doc["conformsTo"].is_string())
        report("SyntaxError", "\"conformsTo\" must be a string");
    fail_now(Stage::Parse);

    if (doc.contains("conformsTo") && doc["conformsTo"].get<std::string>() != wm.package_name)
        report("ConformanceError", "model conforms to '" + doc["conformsTo"].get<std::string>()
                                       + "', but the language is '" + wm.package_name + "'");

    ModelInstance m(wm);
    for (const auto& o : doc["objects"]) {
        at_id.clear();
        if (!o.is_object() || !o.contains("id") || !o["id"].is_string() || !o.contains("class")
            || !o["class"].is_string()) {
            report("SyntaxError", "every object needs string \"id\" and \"class\" members");
            continue;
        }
        if (o.contains("slots") && !o["slots"].is_object()) {
            report("SyntaxError", "\"slots\" of " + o["id"].get<std::string>() + " must be an object");
            continue;
        }
        std::string id = o["id"];
        std::string cls = o["class"];
        at_id = id;
        if (id.empty()) {
            report("SyntaxError", "object ids cannot be empty");
            continue;
        }
        if (m.find(id)) {
            report("DuplicateId", "object id '" + id + "' is used twice");
            continue;
        }
        try {
            m.create(cls, id);
        } catch (const Fault& f) {
            report(f.kind() == FaultKind::UnknownClass ? "UnknownClass" : "AbstractInstantiation",
                   "object " + id + ": " + f.what());
        }
    }
    fail_now(Stage::Conformance);

    auto resolve = [&](const json& j, const std::string& where) -> std::optional<ObjRef> {
        if (j.is_null())
            return std::nullopt;
        if (!j.is_string() || j.get<std::string>().size() < 2 || j.get<std::string>()[0] != '@') {
            report("ConformanceError", where + " expects an \"@id\" reference");
            return std::nullopt;
        }
        auto r = m.find(j.get<std::string>().substr(1));
        if (!r)
            report("ResolutionError", where + " refers to undeclared object " + j.get<std::string>());
        return r;
    };
    auto scalar = [&](const json& j, PrimitiveType t, const std::string& where) -> std::optional<Value> {
        switch (t) {
        case PrimitiveType::Int:
            if (j.is_number_integer())
                return Value(j.get<std::int64_t>());
            break;
        case PrimitiveType::Bool:
            if (j.is_boolean())
                return Value(j.get<bool>());
            break;
        case PrimitiveType::String:
            if (j.is_string())
                return Value(j.get<std::string>());
            break;
        }
        report("ConformanceError", where + " expects a " + std::string(to_string(t)) + " value");
        return std::nullopt;
    };

    // Second pass: slots, references resolved against all declared ids.
    std::size_t idx = 0;
    for (const auto& o : doc["objects"]) {
        ObjRef r{static_cast<std::uint32_t>(idx++)};
        if (!o.contains("slots"))
            continue;
        at_id = m.id_of(r);
        const WovenClass& wc = m.class_of(r);
        for (const auto& [key, val] : o["slots"].items()) {
            const std::string where = m.id_of(r) + "." + key;
            auto slot = wc.feature_slot(key);
            if (!slot) {
                report("UnknownFeature", "class " + wc.name + " has no feature '" + key + "' (object " + m.id_of(r) + ")");
                continue;
            }
            const WovenFeature& f = wc.features[*slot];
            if (f.multiplicity.many) {
                if (!val.is_array()) {
                    report("ConformanceError", where + " is multi-valued; expected an array");
                    continue;
                }
                Collection c{f.is_reference ? CollKind::OrderedSet : CollKind::Sequence, {}};
                for (const auto& item : val) {
                    if (f.is_reference) {
                        if (auto t = resolve(item, where)) {
                            if (!c.insert(*t))
                                report("ConformanceError", where + " lists " + item.get<std::string>() + " twice");
                        }
                    } else if (auto v = scalar(item, f.type, where)) {
                        c.items.push_back(*v);
                    }
                }
                m.raw_set(r, *slot, std::move(c));
            } else if (f.is_reference) {
                if (auto t = resolve(val, where))
                    m.raw_set(r, *slot, *t);
            } else if (auto v = scalar(val, f.type, where)) {
                m.raw_set(r, *slot, *v);
            }
        }
    }
    fail_now(Stage::Conformance);

    // Reference targets must conform before opposites can be completed.
    for (ObjRef r : m.all()) {
        at_id = m.id_of(r);
        const WovenClass& wc = m.class_of(r);
        for (std::size_t s = 0; s < wc.features.size(); ++s) {
            const WovenFeature& f = wc.features[s];
            if (!f.is_reference)
                continue;
            const Value& v = m.get(r, s);
            std::vector<Value> items = v.is_collection() ? v.as_collection().items : std::vector<Value>{v};
            for (const auto& i : items)
                if (i.is_object() && !m.class_of(i.as_object()).is_kind_of(f.target))
                    report("ConformanceError", m.id_of(r) + "." + f.name + " refers to " + m.id_of(i.as_object())
                                                   + " of class " + m.class_of(i.as_object()).name + ", expected "
                                                   + f.target);
        }
    }
    fail_now(Stage::Conformance);

    // Complete missing opposite ends; record containers.
    for (ObjRef r : m.all()) {
        at_id = m.id_of(r);
        const WovenClass& wc = m.class_of(r);
        for (std::size_t s = 0; s < wc.features.size(); ++s) {
            const WovenFeature& f = wc.features[s];
            if (!f.is_reference || !f.opposite)
                continue;
            const Value v = m.get(r, s);
            std::vector<Value> items = v.is_collection() ? v.as_collection().items : std::vector<Value>{v};
            for (const auto& i : items) {
                if (!i.is_object())
                    continue;
                ObjRef t = i.as_object();
                auto os = m.class_of(t).feature_slot(*f.opposite);
                if (!os)
                    continue;
                const Value& back = m.get(t, *os);
                if (back.is_collection()) {
                    if (!back.as_collection().contains(r)) {
                        Collection c = back.as_collection();
                        c.items.push_back(r);
                        m.raw_set(t, *os, std::move(c));
                    }
                } else if (back.is_void()) {
                    m.raw_set(t, *os, r);
                } else if (back.as_object() != r) {
                    report("OppositeMismatch", m.id_of(r) + "." + f.name + " refers to " + m.id_of(t) + " but "
                                                   + m.id_of(t) + "." + *f.opposite + " refers to "
                                                   + m.id_of(back.as_object()));
                }
            }
        }
    }
    for (ObjRef r : m.all()) {
        at_id = m.id_of(r);
        const WovenClass& wc = m.class_of(r);
        for (std::size_t s = 0; s < wc.features.size(); ++s) {
            const WovenFeature& f = wc.features[s];
            if (!f.is_containment)
                continue;
            const Value& v = m.get(r, s);
            std::vector<Value> items = v.is_collection() ? v.as_collection().items : std::vector<Value>{v};
            for (const auto& i : items) {
                if (!i.is_object())
                    continue;
                ObjRef t = i.as_object();
                if (m.obj(t).container)
                    report("MultipleContainers", "object " + m.id_of(t) + " is contained by both "
                                                     + m.id_of(m.obj(t).container->owner) + " and " + m.id_of(r));
                else
                    m.raw_set_container(t, ContainerLink{r, s});
            }
        }
    }
    fail_now(Stage::Conformance);
    at_id.clear();

    diags = check_conformance(m, unit);
    fail_now(Stage::Conformance);

    if (doc.contains("roots")) {
        std::set<std::string> declared;
        for (const auto& j : doc["roots"]) {
            auto r = resolve(j, "roots");
            if (r)
                declared.insert(m.id_of(*r));
        }
        std::set<std::string> actual;
        for (ObjRef r : m.roots())
            actual.insert(m.id_of(r));
        if (diags.empty() && declared != actual)
            report("RootsMismatch", "\"roots\" does not list exactly the uncontained objects");
        fail_now(Stage::Conformance);
    }
    return m;
}

std::string save_model(const ModelInstance& m)
{
    auto diags = check_conformance(m);
    if (!diags.empty())
        throw DiagnosticError(Stage::Conformance, std::move(diags));

    auto ref = [&](const Value& v) { return json("@" + m.id_of(v.as_object())); };
    auto to_json = [&](const WovenFeature& f, const Value& v) -> json {
        if (v.is_collection()) {
            json arr = json::array();
            for (const auto& i : v.as_collection().items)
                arr.push_back(f.is_reference ? ref(i) : to_json_scalar(i));
            return arr;
        }
        return f.is_reference ? ref(v) : to_json_scalar(v);
    };

    std::vector<ObjRef> objs = m.all();
    std::sort(objs.begin(), objs.end(), [&](ObjRef a, ObjRef b) { return m.id_of(a) < m.id_of(b); });

    json out = json::object();
    out["conformsTo"] = m.woven().package_name;
    json arr = json::array();
    json roots = json::array();
    for (ObjRef r : objs) {
        const Obj& o = m.obj(r);
        json slots = json::object();
        for (std::size_t s = 0; s < o.cls->features.size(); ++s) {
            const WovenFeature& f = o.cls->features[s];
            if (o.slots[s] == default_value(f))
                continue;
            slots[f.name] = to_json(f, o.slots[s]);
        }
        arr.push_back(json{{"id", o.id}, {"class", o.cls->name}, {"slots", slots}});
        if (!o.container)
            roots.push_back("@" + o.id);
    }
    out["objects"] = arr;
    out["roots"] = roots;
    return out.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Isomorphism

namespace {

std::uint64_t mix(std::uint64_t h, std::uint64_t v)
{
    v *= 0x9E3779B97F4A7C15ull;
    v ^= v >> 29;
    h ^= v + 0xBF58476D1CE4E5B9ull + (h << 6) + (h >> 2);
    return h;
}

std::uint64_t hash_value(const Value& v)
{
    if (v.is_int())
        return mix(1, static_cast<std::uint64_t>(v.as_int()));
    if (v.is_bool())
        return mix(2, v.as_bool());
    if (v.is_string())
        return mix(3, std::hash<std::string>{}(v.as_string()));
    if (v.is_collection()) {
        std::uint64_t h = 4;
        for (const auto& i : v.as_collection().items)
            h = mix(h, hash_value(i));
        return h;
    }
    return 5;
}

// Reference targets of one object, slot by slot, as object indices.
using Adjacency = std::vector<std::vector<std::uint32_t>>;

Adjacency adjacency(const ModelInstance& m, ObjRef r)
{
    const Obj& o = m.obj(r);
    Adjacency adj(o.slots.size());
    for (std::size_t s = 0; s < o.slots.size(); ++s) {
        if (!o.cls->features[s].is_reference)
            continue;
        const Value& v = o.slots[s];
        if (v.is_object())
            adj[s].push_back(v.as_object().index);
        else if (v.is_collection())
            for (const auto& i : v.as_collection().items)
                adj[s].push_back(i.as_object().index);
    }
    return adj;
}

struct Graph {
    const ModelInstance& m;
    std::vector<Adjacency> out;
    // (source, slot, position) per target.
    std::vector<std::vector<std::tuple<std::uint32_t, std::uint32_t, std::uint32_t>>> in;
    std::vector<std::uint64_t> color;

    explicit Graph(const ModelInstance& model) : m(model), out(model.size()), in(model.size()), color(model.size())
    {
        for (std::uint32_t i = 0; i < m.size(); ++i) {
            out[i] = adjacency(m, ObjRef{i});
            for (std::uint32_t s = 0; s < out[i].size(); ++s)
                for (std::uint32_t p = 0; p < out[i][s].size(); ++p)
                    in[out[i][s][p]].emplace_back(i, s, p);
            const Obj& o = m.obj(ObjRef{i});
            std::uint64_t h = std::hash<std::string>{}(o.cls->name);
            for (std::size_t s = 0; s < o.slots.size(); ++s)
                if (!o.cls->features[s].is_reference)
                    h = mix(h, hash_value(o.slots[s]));
            color[i] = h;
        }
    }

    void refine()
    {
        std::vector<std::uint64_t> next(color.size());
        for (std::size_t i = 0; i < color.size(); ++i) {
            std::uint64_t h = color[i];
            for (const auto& slot : out[i]) {
                h = mix(h, 0x51ED);
                for (auto t : slot)
                    h = mix(h, color[t]);
            }
            next[i] = h;
        }
        color = std::move(next);
    }
};

std::size_t distinct(const std::vector<std::uint64_t>& c)
{
    return std::set<std::uint64_t>(c.begin(), c.end()).size();
}

} // namespace

bool isomorphic(const ModelInstance& a, const ModelInstance& b)
{
    if (a.size() != b.size() || a.woven().package_name != b.woven().package_name)
        return false;
    const std::size_t n = a.size();
    Graph ga(a), gb(b);

    // Colour refinement on both graphs in lockstep.
    for (std::size_t round = 0; round <= n; ++round) {
        std::size_t before = distinct(ga.color);
        auto sa = ga.color, sb = gb.color;
        std::sort(sa.begin(), sa.end());
        std::sort(sb.begin(), sb.end());
        if (sa != sb)
            return false;
        ga.refine();
        gb.refine();
        if (distinct(ga.color) == before) {
            sa = ga.color;
            sb = gb.color;
            std::sort(sa.begin(), sa.end());
            std::sort(sb.begin(), sb.end());
            if (sa != sb)
                return false;
            break;
        }
    }

    std::map<std::uint64_t, std::vector<std::uint32_t>> by_color;
    for (std::uint32_t i = 0; i < n; ++i)
        by_color[gb.color[i]].push_back(i);
    std::vector<std::uint32_t> order(n);
    for (std::uint32_t i = 0; i < n; ++i)
        order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](auto x, auto y) {
        return by_color[ga.color[x]].size() < by_color[ga.color[y]].size();
    });

    constexpr std::int64_t kNone = -1;
    std::vector<std::int64_t> fwd(n, kNone), rev(n, kNone);

    auto consistent = [&](std::uint32_t x, std::uint32_t y) {
        const auto& ox = ga.out[x];
        const auto& oy = gb.out[y];
        if (ox.size() != oy.size())
            return false;
        for (std::size_t s = 0; s < ox.size(); ++s) {
            if (ox[s].size() != oy[s].size())
                return false;
            for (std::size_t p = 0; p < ox[s].size(); ++p) {
                auto t = ox[s][p], u = oy[s][p];
                if ((fwd[t] != kNone && fwd[t] != u) || (rev[u] != kNone && rev[u] != t))
                    return false;
            }
        }
        for (auto [z, s, p] : ga.in[x])
            if (fwd[z] != kNone && gb.out[fwd[z]][s][p] != y)
                return false;
        for (auto [w, s, p] : gb.in[y])
            if (rev[w] != kNone && ga.out[rev[w]][s][p] != x)
                return false;
        const Obj& obx = a.obj(ObjRef{x});
        const Obj& oby = b.obj(ObjRef{y});
        if (obx.cls->name != oby.cls->name)
            return false;
        for (std::size_t s = 0; s < obx.slots.size(); ++s)
            if (!obx.cls->features[s].is_reference && !(obx.slots[s] == oby.slots[s]))
                return false;
        return true;
    };

    std::function<bool(std::size_t)> search = [&](std::size_t k) {
        if (k == n)
            return true;
        std::uint32_t x = order[k];
        for (std::uint32_t y : by_color[ga.color[x]]) {
            if (rev[y] != kNone)
                continue;
            fwd[x] = y;
            rev[y] = x;
            if (consistent(x, y) && search(k + 1))
                return true;
            fwd[x] = kNone;
            rev[y] = kNone;
        }
        return false;
    };
    return search(0);
}

} // namespace mashup
