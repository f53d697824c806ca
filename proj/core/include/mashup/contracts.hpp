#ifndef MASHUP_CONTRACTS_HPP
#define MASHUP_CONTRACTS_HPP

#include "mashup/expr.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace mashup {

struct NamedCondition {
    std::string name;
    ExprPtr body;
    SourcePos pos;
};

/// A pre- or postcondition clause attached to an operation.
struct OpCondition {
    std::string op_name;
    std::string name;
    ExprPtr body;
    SourcePos pos;
};

struct ContractContribution {
    std::string class_name;
    std::vector<NamedCondition> invariants;
    std::vector<OpCondition> pre_conditions;
    std::vector<OpCondition> post_conditions;
    SourcePos pos;
};

struct ContractModule {
    std::string package_name;
    std::vector<std::string> imports;
    std::vector<ContractContribution> contributions;
    std::string source_unit;

    /// The metamodel unit named by the first `require`.
    const std::string& target_metamodel() const { return imports.front(); }
};

/// Parses `.inv` text. Throws DiagnosticError(Stage::Parse).
ContractModule parse_contracts(std::string_view text, const std::string& unit = "<contracts>");

} // namespace mashup

#endif // MASHUP_CONTRACTS_HPP
