#include "mashup/diagnostic.hpp"

#include <algorithm>

namespace mashup {

std::string Diagnostic::str(bool color) const
{
    std::string out = unit.empty() ? std::string("<input>") : unit;
    if (pos.line > 0)
        out += ':' + std::to_string(pos.line) + ':' + std::to_string(pos.col);
    out += ": ";
    if (color)
        out += "\x1b[1;31m" + code + "\x1b[0m";
    else
        out += code;
    out += ' ';
    out += message;
    return out;
}

namespace {

std::string summarize(const std::vector<Diagnostic>& diags)
{
    if (diags.empty())
        return "unknown error";
    std::string out = diags.front().str();
    if (diags.size() > 1)
        out += " (+" + std::to_string(diags.size() - 1) + " more)";
    return out;
}

} // namespace

DiagnosticError::DiagnosticError(Stage stage, std::vector<Diagnostic> diags)
    : std::runtime_error(summarize(diags)), stage_(stage), diags_(std::move(diags))
{
}

bool DiagnosticError::has_code(const std::string& code) const
{
    return std::any_of(diags_.begin(), diags_.end(),
                       [&](const Diagnostic& d) { return d.code == code; });
}

const char* to_string(FaultKind kind)
{
    switch (kind) {
    case FaultKind::TypeFault: return "TypeFault";
    case FaultKind::DivisionByZero: return "DivisionByZero";
    case FaultKind::UnboundVariable: return "UnboundVariable";
    case FaultKind::VoidInvocation: return "VoidInvocation";
    case FaultKind::NoSuchMethod: return "NoSuchMethod";
    case FaultKind::AbstractInstantiation: return "AbstractInstantiation";
    case FaultKind::UnknownClass: return "UnknownClass";
    case FaultKind::UnknownFeature: return "UnknownFeature";
    case FaultKind::UpperBoundExceeded: return "UpperBoundExceeded";
    case FaultKind::ContainmentCycle: return "ContainmentCycle";
    case FaultKind::PreconditionViolation: return "PreconditionViolation";
    case FaultKind::PostconditionViolation: return "PostconditionViolation";
    case FaultKind::InvariantViolation: return "InvariantViolation";
    case FaultKind::Raised: return "Raised";
    }
    return "Fault";
}

Fault::Fault(FaultKind kind, const std::string& message, std::string name)
    : std::runtime_error(message), kind_(kind), name_(std::move(name))
{
}

bool Fault::is_contract_violation() const noexcept
{
    return kind_ == FaultKind::PreconditionViolation || kind_ == FaultKind::PostconditionViolation
        || kind_ == FaultKind::InvariantViolation;
}

} // namespace mashup
