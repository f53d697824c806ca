#ifndef MASHUP_RECURSIVE_FIXTURE_HPP
#define MASHUP_RECURSIVE_FIXTURE_HPP

#include <cstddef>
#include <string>

namespace mashup {

/// Activity model unrolling the Hilbert L-system
///   A -> + B F - A F A - F B +     B -> - A F + B F B + F A -
/// to a given depth. Each expansion of a nonterminal is a fork/join region
/// whose side branch is a "level k" marker action; inside it every terminal
/// is an action and every nonterminal occurrence a "call X" action followed
/// by the nested region. Depth 0 is a single action.
struct RecursiveFixture {
    int depth = 0;
    std::string model_json; // fuml model, conformsTo "fuml"
    std::size_t elements = 0;
    std::size_t actions = 0; // = expected NodeExecuted count
};

RecursiveFixture generate_recursive_fixture(int depth);

/// Closed forms, independent of the generator.
std::size_t recursive_element_count(int depth);
std::size_t recursive_action_count(int depth);

} // namespace mashup

#endif // MASHUP_RECURSIVE_FIXTURE_HPP
