#ifndef MASHUP_DIAGNOSTIC_HPP
#define MASHUP_DIAGNOSTIC_HPP

#include <stdexcept>
#include <string>
#include <vector>

namespace mashup {

struct SourcePos {
    int line = 0;
    int col = 0;

    friend bool operator==(const SourcePos&, const SourcePos&) = default;
};

/// A positioned problem report. Prints as `unit:line:col: CODE message`.
struct Diagnostic {
    std::string unit;
    SourcePos pos;
    std::string code;
    std::string message;

    std::string str(bool color = false) const;
};

/// Which pipeline stage produced a batch of diagnostics; the CLI maps this
/// onto its exit-code table.
enum class Stage { Parse, Composition, Type, Conformance };

class DiagnosticError : public std::runtime_error {
public:
    DiagnosticError(Stage stage, std::vector<Diagnostic> diags);

    Stage stage() const noexcept { return stage_; }
    const std::vector<Diagnostic>& diagnostics() const noexcept { return diags_; }
    bool has_code(const std::string& code) const;

private:
    Stage stage_;
    std::vector<Diagnostic> diags_;
};

enum class FaultKind {
    TypeFault,
    DivisionByZero,
    UnboundVariable,
    VoidInvocation,
    NoSuchMethod,
    AbstractInstantiation,
    UnknownClass,
    UnknownFeature,
    UpperBoundExceeded,
    ContainmentCycle,
    PreconditionViolation,
    PostconditionViolation,
    InvariantViolation,
    Raised,
};

const char* to_string(FaultKind kind);

/// Unrecoverable run-time fault raised while executing DSL code or mutating a
/// model. Contract violations carry the violated clause in `name()`.
class Fault : public std::runtime_error {
public:
    Fault(FaultKind kind, const std::string& message, std::string name = {});

    FaultKind kind() const noexcept { return kind_; }
    const std::string& name() const noexcept { return name_; }
    bool is_contract_violation() const noexcept;

private:
    FaultKind kind_;
    std::string name_;
};

} // namespace mashup

#endif // MASHUP_DIAGNOSTIC_HPP
