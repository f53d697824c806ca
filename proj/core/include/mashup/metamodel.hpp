#ifndef MASHUP_METAMODEL_HPP
#define MASHUP_METAMODEL_HPP

#include "mashup/diagnostic.hpp"
#include "mashup/types.hpp"

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mashup {

struct Attribute {
    std::string name;
    PrimitiveType type = PrimitiveType::Int;
    Bounds multiplicity;
    SourcePos pos;

    friend bool operator==(const Attribute& a, const Attribute& b)
    {
        return a.name == b.name && a.type == b.type && a.multiplicity == b.multiplicity;
    }
};

struct Reference {
    std::string name;
    std::string target;
    Bounds multiplicity;
    bool is_containment = false;
    std::optional<std::string> opposite;
    SourcePos pos;

    friend bool operator==(const Reference& a, const Reference& b)
    {
        return a.name == b.name && a.target == b.target && a.multiplicity == b.multiplicity
            && a.is_containment == b.is_containment && a.opposite == b.opposite;
    }
};

struct Param {
    std::string name;
    TypeRef type;

    friend bool operator==(const Param&, const Param&) = default;
};

struct OperationSig {
    std::string name;
    std::vector<Param> params;
    TypeRef return_type = TypeRef::void_type();
    SourcePos pos;

    friend bool operator==(const OperationSig& a, const OperationSig& b)
    {
        return a.name == b.name && a.params == b.params && a.return_type == b.return_type;
    }
};

enum class ClassOrigin { BaseMetamodel, Aspect };

struct MetaClass {
    std::string name;
    bool is_abstract = false;
    std::vector<std::string> supertypes;
    std::vector<Attribute> attributes;
    std::vector<Reference> references;
    std::vector<OperationSig> operations;
    ClassOrigin origin = ClassOrigin::BaseMetamodel;
    SourcePos pos;

    const Attribute* find_attribute(std::string_view n) const;
    const Reference* find_reference(std::string_view n) const;
    const OperationSig* find_operation(std::string_view n) const;

    friend bool operator==(const MetaClass& a, const MetaClass& b)
    {
        return a.name == b.name && a.is_abstract == b.is_abstract && a.supertypes == b.supertypes
            && a.attributes == b.attributes && a.references == b.references
            && a.operations == b.operations && a.origin == b.origin;
    }
};

/// The abstract-syntax concern: one package of metaclasses.
struct Metamodel {
    std::string name;
    std::vector<MetaClass> classes;
    std::string source_unit;

    const MetaClass* find(std::string_view class_name) const;
    std::string qualified_name(std::string_view class_name) const { return name + "." + std::string(class_name); }

    friend bool operator==(const Metamodel& a, const Metamodel& b)
    {
        return a.name == b.name && a.classes == b.classes;
    }
};

/// Parses `.mm` text and validates it. Throws DiagnosticError (Stage::Parse)
/// carrying SyntaxError, ResolutionError or CycleError diagnostics.
Metamodel parse_metamodel(std::string_view text, const std::string& unit = "<metamodel>");

/// Syntax only; no resolution or cycle checks.
Metamodel parse_metamodel_unchecked(std::string_view text, const std::string& unit = "<metamodel>");

/// Empty iff every metamodel, class and reference invariant holds.
std::vector<Diagnostic> validate_metamodel(const Metamodel& mm);

/// Canonical `.mm` rendering; parse_metamodel(pretty_print(mm)) == mm.
std::string pretty_print(const Metamodel& mm);

/// Direct supertype edges of a metamodel, keyed by class name.
std::map<std::string, std::vector<std::string>> supertype_graph(const Metamodel& mm);

} // namespace mashup

#endif // MASHUP_METAMODEL_HPP
