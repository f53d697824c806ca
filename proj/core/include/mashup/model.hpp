#ifndef MASHUP_MODEL_HPP
#define MASHUP_MODEL_HPP

#include "mashup/composer.hpp"
#include "mashup/value.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace mashup {

struct ContainerLink {
    ObjRef owner;
    std::size_t feature = 0;

    friend bool operator==(const ContainerLink&, const ContainerLink&) = default;
};

struct Obj {
    std::string id;
    const WovenClass* cls = nullptr;
    /// Indexed like cls->features.
    std::vector<Value> slots;
    std::optional<ContainerLink> container;

    friend bool operator==(const Obj& a, const Obj& b)
    {
        return a.id == b.id && a.cls == b.cls && a.slots == b.slots && a.container == b.container;
    }
};

/// An object graph conforming to a WovenModel. Every mutation goes through
/// set/add/remove, which keep opposite ends in sync and containment a forest.
class ModelInstance {
public:
    explicit ModelInstance(const WovenModel& wm) : wm_(&wm) {}

    const WovenModel& woven() const { return *wm_; }

    /// Fresh object with default slots. An empty id gets the next free `o<N>`.
    ObjRef create(std::string_view class_name, std::string id = {});

    std::size_t size() const { return objects_.size(); }
    const Obj& obj(ObjRef r) const { return objects_.at(r.index); }
    const std::string& id_of(ObjRef r) const { return obj(r).id; }
    const WovenClass& class_of(ObjRef r) const { return *obj(r).cls; }
    std::optional<ObjRef> find(std::string_view id) const;
    std::vector<ObjRef> all() const;
    /// Objects without a container, in creation order.
    std::vector<ObjRef> roots() const;
    std::optional<ObjRef> container_of(ObjRef r) const;

    const Value& get(ObjRef r, std::string_view feature) const;
    const Value& get(ObjRef r, std::size_t slot) const { return obj(r).slots.at(slot); }

    /// Replaces the value of a feature. Bidirectional references unlink the
    /// old partner and link the new one; containment detaches the value from
    /// its previous container first.
    void set(ObjRef r, std::string_view feature, Value v);
    /// Adds one element to a feature. Throws UpperBoundExceeded on a full
    /// single-valued feature.
    void add(ObjRef r, std::string_view feature, Value v);
    void remove(ObjRef r, std::string_view feature, const Value& v);

    /// Writes a slot without any synchronization; for loaders and tests that
    /// need to build invalid graphs on purpose.
    void raw_set(ObjRef r, std::size_t slot, Value v) { objects_.at(r.index).slots.at(slot) = std::move(v); }
    void raw_set_container(ObjRef r, std::optional<ContainerLink> c) { objects_.at(r.index).container = c; }

    friend bool operator==(const ModelInstance& a, const ModelInstance& b)
    {
        return a.wm_ == b.wm_ && a.objects_ == b.objects_;
    }

private:
    std::size_t slot_of(ObjRef r, std::string_view feature) const;
    const WovenFeature& feat(ObjRef r, std::size_t slot) const { return obj(r).cls->features[slot]; }
    std::optional<std::size_t> opposite_slot(ObjRef target, const WovenFeature& f) const;
    Value coerce(const WovenFeature& f, Value v) const;
    void check_element(const WovenFeature& f, const Value& v) const;

    /// Throws ContainmentCycle if linking a -f-> b would close a cycle.
    void check_link(ObjRef a, std::size_t f, ObjRef b) const;
    void link(ObjRef a, std::size_t f, ObjRef b);
    void unlink(ObjRef a, std::size_t f, ObjRef b);
    void raw_link(ObjRef a, std::size_t f, ObjRef b);
    void detach(ObjRef child);
    void ensure_can_contain(ObjRef owner, ObjRef child) const;
    bool holds(ObjRef a, std::size_t f, ObjRef b) const;

    const WovenModel* wm_;
    std::vector<Obj> objects_;
    std::unordered_map<std::string, std::uint32_t> ids_;
    std::uint64_t next_id_ = 1;
};

/// Factory entry point: create_instance(C) on a woven class.
ObjRef create_instance(ModelInstance& m, std::string_view class_name);

/// Default slot value for a feature.
Value default_value(const WovenFeature& f);

/// Types, bounds, opposite coherence and the containment forest.
std::vector<Diagnostic> check_conformance(const ModelInstance& m, const std::string& unit = "<model>");

/// JSON model format. Throws DiagnosticError: Stage::Parse for malformed
/// JSON, Stage::Conformance for unknown classes/features/ids and invalid graphs.
ModelInstance load_model(std::string_view text, const WovenModel& wm, const std::string& unit = "<model>");

/// Deterministic JSON: objects by id, slot keys sorted, default slots omitted.
/// Throws DiagnosticError(Stage::Conformance) on a non-conformant model.
std::string save_model(const ModelInstance& m);

/// Graph isomorphism up to id renaming.
bool isomorphic(const ModelInstance& a, const ModelInstance& b);

} // namespace mashup

#endif // MASHUP_MODEL_HPP
