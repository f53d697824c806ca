#ifndef MASHUP_INTERPRETER_HPP
#define MASHUP_INTERPRETER_HPP

#include "mashup/model.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mashup {

enum class ContractPolicy {
    Off,
    PrePostOnly,
    Full, // pre/post plus the receiver's invariants after every invocation
};

const char* to_string(ContractPolicy p);
std::optional<ContractPolicy> contract_policy_from_name(std::string_view name);

/// Order of `inSchedulingOrder()`: by object id, ascending or descending.
enum class TieBreak { Ascending, Descending };

struct TraceEvent {
    enum class Kind { OpEnter, OpExit, ContractViolation, NodeExecuted };

    Kind kind;
    std::string detail;

    friend bool operator==(const TraceEvent&, const TraceEvent&) = default;
};

const char* to_string(TraceEvent::Kind k);

struct Trace {
    std::vector<TraceEvent> events;

    std::vector<std::string> node_labels() const;
    /// One `KIND\tdetail` line per event.
    std::string str() const;
    /// OpEnter/OpExit pairs nest properly.
    bool well_nested() const;

    friend bool operator==(const Trace&, const Trace&) = default;
};

struct RuntimeOptions {
    ContractPolicy policy = ContractPolicy::PrePostOnly;
    TieBreak tiebreak = TieBreak::Ascending;
    /// Record OpEnter/OpExit; NodeExecuted and violations are always kept.
    bool record_calls = true;
    std::size_t max_depth = 2000;
};

/// Evaluation environment for one expression: `self`, local bindings and the
/// model. Used directly for pure evaluation (contracts, queries).
struct Environment {
    const ModelInstance* model = nullptr;
    std::optional<ObjRef> self;
    std::map<std::string, Value> locals;
    TieBreak tiebreak = TieBreak::Ascending;
};

/// Pure evaluation: never mutates the model. Effectful constructs (object
/// creation, mutating collection ops, user operation calls, trace) fault.
Value eval_expr(const Expr& e, const Environment& env);

/// Executes operations on a model with contract enforcement.
class Interpreter {
public:
    Interpreter(ModelInstance& model, RuntimeOptions options = {});
    ~Interpreter();
    Interpreter(const Interpreter&) = delete;
    Interpreter& operator=(const Interpreter&) = delete;

    /// Dispatches `op` on `self` and runs it. Faults propagate as Fault.
    Value invoke(ObjRef self, std::string_view op, std::vector<Value> args = {});

    const Trace& trace() const;
    Trace take_trace();
    ModelInstance& model();
    const RuntimeOptions& options() const;

private:
    struct Impl;
    Impl* impl_;
};

struct CheckResult {
    enum class Status { Holds, Violated, Error };

    Status status = Status::Holds;
    std::string invariant;
    std::string owner;
    ObjRef object;
    std::string object_id;
    std::string message;

    bool holds() const { return status == Status::Holds; }
};

/// Evaluates one flattened invariant with self bound to `obj`. Evaluation
/// faults are reported as Status::Error, never thrown.
CheckResult check_invariant(const FlatInvariant& inv, ObjRef obj, const ModelInstance& model);

/// All flat invariants of all objects, by object id then owner order.
std::vector<CheckResult> check_model(const ModelInstance& model);

} // namespace mashup

#endif // MASHUP_INTERPRETER_HPP
