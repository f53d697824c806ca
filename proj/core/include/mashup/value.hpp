#ifndef MASHUP_VALUE_HPP
#define MASHUP_VALUE_HPP

#include "mashup/types.hpp"

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace mashup {

/// Handle to an object of a ModelInstance. Equality is object identity.
struct ObjRef {
    std::uint32_t index = 0;

    friend auto operator<=>(const ObjRef&, const ObjRef&) = default;
};

struct VoidValue {
    friend bool operator==(const VoidValue&, const VoidValue&) = default;
};

struct Value;

struct Collection {
    CollKind kind = CollKind::Sequence;
    std::vector<Value> items;

    bool contains(const Value& v) const;
    /// Appends unless the kind is unique and v is already present.
    bool insert(Value v);
    bool erase(const Value& v);
};

/// Run-time value. Primitives compare structurally, objects by identity.
struct Value {
    std::variant<VoidValue, std::int64_t, bool, std::string, ObjRef, Collection> data;

    Value() = default;
    Value(VoidValue v) : data(v) {}
    Value(std::int64_t i) : data(i) {}
    Value(int i) : data(static_cast<std::int64_t>(i)) {}
    Value(bool b) : data(b) {}
    Value(std::string s) : data(std::move(s)) {}
    Value(const char* s) : data(std::string(s)) {}
    Value(ObjRef r) : data(r) {}
    Value(Collection c) : data(std::move(c)) {}

    bool is_void() const { return std::holds_alternative<VoidValue>(data); }
    bool is_int() const { return std::holds_alternative<std::int64_t>(data); }
    bool is_bool() const { return std::holds_alternative<bool>(data); }
    bool is_string() const { return std::holds_alternative<std::string>(data); }
    bool is_object() const { return std::holds_alternative<ObjRef>(data); }
    bool is_collection() const { return std::holds_alternative<Collection>(data); }

    std::int64_t as_int() const { return std::get<std::int64_t>(data); }
    bool as_bool() const { return std::get<bool>(data); }
    const std::string& as_string() const { return std::get<std::string>(data); }
    ObjRef as_object() const { return std::get<ObjRef>(data); }
    const Collection& as_collection() const { return std::get<Collection>(data); }
    Collection& as_collection() { return std::get<Collection>(data); }

    friend bool operator==(const Value& a, const Value& b) { return a.data == b.data; }
};

inline bool operator==(const Collection& a, const Collection& b)
{
    return a.kind == b.kind && a.items == b.items;
}

/// Builds a collection of the given kind; unique kinds drop later duplicates.
Collection make_collection(CollKind kind, std::vector<Value> items);

} // namespace mashup

#endif // MASHUP_VALUE_HPP
