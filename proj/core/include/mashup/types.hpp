#ifndef MASHUP_TYPES_HPP
#define MASHUP_TYPES_HPP

#include <memory>
#include <optional>
#include <string>
#include <string_view>

namespace mashup {

/// Name of the implicit reflection root every class inherits.
inline constexpr std::string_view kRootClass = "Root";

enum class PrimitiveType { Int, Bool, String };

const char* to_string(PrimitiveType t);
std::optional<PrimitiveType> primitive_from_name(std::string_view name);

/// Multiplicity. The upper bound is either 1 or unbounded.
struct Bounds {
    int lower = 0;
    bool many = false;

    static Bounds optional() { return {0, false}; }
    static Bounds one() { return {1, false}; }
    static Bounds any() { return {0, true}; }

    bool is_default() const { return lower == 0 && !many; }
    std::string str() const;

    friend bool operator==(const Bounds&, const Bounds&) = default;
};

enum class CollKind { Set, OrderedSet, Sequence };

const char* to_string(CollKind k);
std::optional<CollKind> coll_kind_from_name(std::string_view name);
inline bool is_unique(CollKind k) { return k != CollKind::Sequence; }

/// A semantic type as written in signatures, variable declarations and
/// inferred by the type checker.
class TypeRef {
public:
    enum class Kind { Void, Null, Int, Bool, String, Class, Collection };

    TypeRef() = default;

    static TypeRef void_type() { return TypeRef(Kind::Void); }
    static TypeRef null_type() { return TypeRef(Kind::Null); }
    static TypeRef primitive(PrimitiveType p);
    static TypeRef of_class(std::string name);
    static TypeRef collection(CollKind kind, TypeRef element);

    Kind kind() const { return kind_; }
    bool is_void() const { return kind_ == Kind::Void; }
    bool is_class() const { return kind_ == Kind::Class; }
    bool is_collection() const { return kind_ == Kind::Collection; }
    bool is_primitive() const { return kind_ == Kind::Int || kind_ == Kind::Bool || kind_ == Kind::String; }

    const std::string& class_name() const { return class_name_; }
    CollKind coll_kind() const { return coll_; }
    const TypeRef& element() const { return *element_; }

    std::string str() const;

    friend bool operator==(const TypeRef& a, const TypeRef& b);

private:
    explicit TypeRef(Kind k) : kind_(k) {}

    Kind kind_ = Kind::Void;
    std::string class_name_;
    CollKind coll_ = CollKind::Sequence;
    std::shared_ptr<const TypeRef> element_;
};

} // namespace mashup

#endif // MASHUP_TYPES_HPP
