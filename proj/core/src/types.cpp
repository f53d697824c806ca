#include "mashup/types.hpp"

namespace mashup {

const char* to_string(PrimitiveType t)
{
    switch (t) {
    case PrimitiveType::Int: return "Int";
    case PrimitiveType::Bool: return "Bool";
    case PrimitiveType::String: return "String";
    }
    return "?";
}

std::optional<PrimitiveType> primitive_from_name(std::string_view name)
{
    if (name == "Int" || name == "Integer")
        return PrimitiveType::Int;
    if (name == "Bool" || name == "Boolean")
        return PrimitiveType::Bool;
    if (name == "String")
        return PrimitiveType::String;
    return std::nullopt;
}

std::string Bounds::str() const
{
    if (lower == 0 && many)
        return "[*]";
    return "[" + std::to_string(lower) + ".." + (many ? std::string("*") : std::string("1")) + "]";
}

const char* to_string(CollKind k)
{
    switch (k) {
    case CollKind::Set: return "Set";
    case CollKind::OrderedSet: return "OrderedSet";
    case CollKind::Sequence: return "Sequence";
    }
    return "?";
}

std::optional<CollKind> coll_kind_from_name(std::string_view name)
{
    if (name == "Set")
        return CollKind::Set;
    if (name == "OrderedSet")
        return CollKind::OrderedSet;
    if (name == "Sequence")
        return CollKind::Sequence;
    return std::nullopt;
}

TypeRef TypeRef::primitive(PrimitiveType p)
{
    switch (p) {
    case PrimitiveType::Int: return TypeRef(Kind::Int);
    case PrimitiveType::Bool: return TypeRef(Kind::Bool);
    case PrimitiveType::String: return TypeRef(Kind::String);
    }
    return TypeRef(Kind::Void);
}

TypeRef TypeRef::of_class(std::string name)
{
    TypeRef t(Kind::Class);
    t.class_name_ = std::move(name);
    return t;
}

TypeRef TypeRef::collection(CollKind kind, TypeRef element)
{
    TypeRef t(Kind::Collection);
    t.coll_ = kind;
    t.element_ = std::make_shared<const TypeRef>(std::move(element));
    return t;
}

std::string TypeRef::str() const
{
    switch (kind_) {
    case Kind::Void: return "Void";
    case Kind::Null: return "void";
    case Kind::Int: return "Int";
    case Kind::Bool: return "Bool";
    case Kind::String: return "String";
    case Kind::Class: return class_name_;
    case Kind::Collection: return std::string(to_string(coll_)) + "<" + element_->str() + ">";
    }
    return "?";
}

bool operator==(const TypeRef& a, const TypeRef& b)
{
    if (a.kind_ != b.kind_)
        return false;
    if (a.kind_ == TypeRef::Kind::Class)
        return a.class_name_ == b.class_name_;
    if (a.kind_ == TypeRef::Kind::Collection)
        return a.coll_ == b.coll_ && *a.element_ == *b.element_;
    return true;
}

} // namespace mashup
