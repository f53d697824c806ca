#ifndef MASHUP_COMPOSER_HPP
#define MASHUP_COMPOSER_HPP

#include "mashup/behavior.hpp"
#include "mashup/contracts.hpp"
#include "mashup/metamodel.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace mashup {

// ---------------------------------------------------------------------------
// Units and manifests

struct EntryPoint {
    std::string class_name;
    std::string op_name;
};

/// A `.mashup` file: the package, its required concern units in order, and
/// an optional `main Class.op;` entry point.
struct MashupManifest {
    std::string package_name;
    std::vector<std::string> imports;
    std::optional<EntryPoint> main;
    std::string source_unit;
};

MashupManifest parse_manifest(std::string_view text, const std::string& unit = "<manifest>");

enum class UnitKind { Metamodel, Contracts, Behavior };

const char* role_of(UnitKind kind);

/// Classifies a unit path by extension: `.mm`; `.inv`/`.ocl`; `.act`/`.kmt`.
std::optional<UnitKind> unit_kind_for(std::string_view path);

struct LoadedUnit {
    std::string name;
    std::variant<Metamodel, ContractModule, BehaviorModule> content;

    UnitKind kind() const { return static_cast<UnitKind>(content.index()); }
};

class UnitLoader {
public:
    virtual ~UnitLoader() = default;
    /// Source text of the named unit, or nullopt when it does not exist.
    virtual std::optional<std::string> read(const std::string& name) = 0;
};

/// Resolves unit names against a base directory.
class FileUnitLoader : public UnitLoader {
public:
    explicit FileUnitLoader(std::filesystem::path base_dir) : base_(std::move(base_dir)) {}
    std::optional<std::string> read(const std::string& name) override;

private:
    std::filesystem::path base_;
};

class MemoryUnitLoader : public UnitLoader {
public:
    MemoryUnitLoader() = default;
    explicit MemoryUnitLoader(std::map<std::string, std::string> files) : files_(std::move(files)) {}

    void add(std::string name, std::string text) { files_[std::move(name)] = std::move(text); }
    std::optional<std::string> read(const std::string& name) override;

    int reads() const { return reads_; }

private:
    std::map<std::string, std::string> files_;
    int reads_ = 0;
};

/// Loads and parses every unit the manifest requires, in manifest order.
/// Units required from inside other units are loaded before their first
/// requirer; a unit required twice is loaded once. Throws DiagnosticError
/// (Stage::Parse) with UnitNotFound or the unit's own parse diagnostics.
std::vector<LoadedUnit> resolve_requires(const MashupManifest& manifest, UnitLoader& loader);

// ---------------------------------------------------------------------------
// Composition cases

enum class CompositionCase {
    KmtKmt,     // aspect with aspect: folded at the model level
    EcoreEcore, // two metamodel classes: forbidden
    EcoreKmt,   // metamodel class with aspect: woven into the rich class
};

const char* to_string(CompositionCase c);

struct ClassDefinition {
    std::string name;
    ClassOrigin origin = ClassOrigin::BaseMetamodel;
    std::string unit;
};

CompositionCase classify_pair(const ClassDefinition& a, const ClassDefinition& b);

/// Everything the aspects of one class contribute, folded across units.
struct Contribution {
    std::string class_name;
    std::vector<std::string> units;
    std::vector<std::string> added_supertypes;
    std::vector<Attribute> attributes;
    std::vector<Reference> references;
    std::vector<MethodPtr> methods;
    std::vector<Renaming> renamings;
    std::vector<NamedCondition> invariants;
    std::vector<OpCondition> pre_conditions;
    std::vector<OpCondition> post_conditions;
    /// Member key (`feature:x`, `method:m`, `inv:n`, `pre:op:n`, ...) to unit.
    std::map<std::string, std::string> provenance;

    friend bool operator==(const Contribution& a, const Contribution& b);
};

Contribution contribution_of(const AspectClass& aspect, const std::string& unit);
Contribution contribution_of(const ContractContribution& contracts, const std::string& unit);

/// Case-1 fold of two contributions to the same class. Throws
/// DiagnosticError(Stage::Composition, FeatureClash) when both define a
/// member with the same name.
Contribution merge(const Contribution& a, const Contribution& b);

// ---------------------------------------------------------------------------
// Woven model

using SupertypeGraph = std::map<std::string, std::vector<std::string>, std::less<>>;

/// Scala-style linearization: the class, then lin(S_n) ... lin(S_1) for its
/// declared supertypes S_1..S_n, keeping only the last occurrence of any
/// repeated class, with Root last. Throws DiagnosticError (CycleError or
/// ResolutionError).
std::vector<std::string> linearize(std::string_view cls, const SupertypeGraph& graph);

struct WovenFeature {
    std::string name;
    bool is_reference = false;
    PrimitiveType type = PrimitiveType::Int;
    Bounds multiplicity;
    std::string target;
    bool is_containment = false;
    std::optional<std::string> opposite;
    std::string defining_class;
    std::string unit;

    TypeRef static_type() const;
};

struct MethodEntry {
    std::string defining_class;
    MethodPtr method;
    std::string unit;
    /// Name under which the body was written; differs after a renaming.
    std::string original_name;
};

struct SignatureEntry {
    OperationSig sig;
    std::string declaring_class;
};

struct ConditionGroup {
    std::string owner;
    std::vector<OpCondition> clauses;
};

struct FlatInvariant {
    std::string owner;
    NamedCondition inv;
};

struct WovenClass {
    std::string name;
    ClassOrigin origin = ClassOrigin::BaseMetamodel;
    bool is_abstract = false;
    std::string base_unit;
    SourcePos pos;
    std::vector<std::string> aspect_units;
    std::vector<std::string> supertypes;
    std::vector<std::string> linearization;

    std::vector<WovenFeature> features;
    std::map<std::string, std::size_t, std::less<>> feature_index;

    std::map<std::string, std::vector<MethodEntry>, std::less<>> method_table;
    std::map<std::string, SignatureEntry, std::less<>> signatures;

    // Members declared directly on this class (base definition + aspects).
    std::vector<WovenFeature> own_features;
    std::vector<OperationSig> own_operations;
    std::vector<MethodEntry> own_methods;
    std::vector<Renaming> renamings;
    std::vector<NamedCondition> own_invariants;
    std::vector<OpCondition> own_pre;
    std::vector<OpCondition> own_post;

    std::vector<FlatInvariant> flat_invariants;
    std::map<std::string, std::vector<ConditionGroup>, std::less<>> flat_pre;
    std::map<std::string, std::vector<ConditionGroup>, std::less<>> flat_post;

    const WovenFeature* feature(std::string_view n) const;
    std::optional<std::size_t> feature_slot(std::string_view n) const;
    /// First method-table entry for the op, i.e. the body dispatch selects.
    const MethodEntry* resolve(std::string_view op) const;
    const SignatureEntry* signature(std::string_view op) const;
    bool is_kind_of(std::string_view ancestor) const;
};

struct WovenModel {
    std::string package_name;
    /// Unit names in require order, with their concern.
    std::vector<std::pair<std::string, UnitKind>> units;
    /// Metamodel declaration order; Root is not listed.
    std::vector<std::string> class_order;
    std::map<std::string, WovenClass, std::less<>> classes;
    std::string root_class = std::string(kRootClass);
    /// `Class.member` to the unit that contributed it.
    std::map<std::string, std::string> provenance;

    const WovenClass* find(std::string_view name) const;
    const WovenClass& at(std::string_view name) const;
    bool is_kind_of(std::string_view cls, std::string_view ancestor) const;
    /// Static conformance of `sub` to `super` (primitives by equality,
    /// classes by linearization, collections by element type).
    bool conforms(const TypeRef& sub, const TypeRef& super) const;
};

/// Weaves parsed units into a WovenModel: classifies every same-named class
/// pair, folds aspects, linearizes, builds feature and method tables,
/// resolves renamings and flattens contracts. Throws
/// DiagnosticError(Stage::Composition) on ForbiddenComposition,
/// FeatureClash, RenameTargetMissing, CycleError, AmbiguousMethod or an
/// invalid result.
WovenModel compose(const std::vector<LoadedUnit>& units, const std::string& package_name = {});

/// Applies the renamings visible from `wc` to its method table and reports
/// every op whose candidate bodies come from unrelated classes.
std::vector<Diagnostic> resolve_method_conflicts(WovenClass& wc, const WovenModel& wm);

/// Invariants of the class and all its supertypes; per-op precondition and
/// postcondition groups, one group per class level in linearization order.
WovenClass flatten_contracts(const WovenClass& wc, const WovenModel& wm);

/// Empty iff the WovenClass and WovenModel invariants hold.
std::vector<Diagnostic> validate_woven(const WovenModel& wm);

// ---------------------------------------------------------------------------
// Composition report

struct RichEntry {
    std::string class_name;
    std::string rich_class;
    std::string base_artifact;
    std::vector<std::string> aspect_traits;
    std::optional<std::string> factory_entry;
    std::vector<std::pair<std::string, std::string>> conversions;
};

struct CompositionReport {
    std::string package_name;
    std::vector<std::pair<std::string, UnitKind>> units;
    std::vector<RichEntry> entries;

    std::string render() const;
};

CompositionReport emit_report(const WovenModel& wm);

} // namespace mashup

#endif // MASHUP_COMPOSER_HPP
