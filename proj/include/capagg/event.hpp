#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "capagg/errors.hpp"

namespace capagg {

// Number of distinct variables a joint support may contain before exhaustive
// truth-table enumeration refuses to run (2^20 atoms is the practical ceiling
// for the exact small-instance machinery).
inline constexpr std::size_t kDefaultSupportCap = 20;

// A total map from variable name to truth value.
using TruthAssignment = std::map<std::string, bool>;

// Immutable Boolean formula over named variables: Var | !e | e & e | e | e.
// Nodes are shared, so copies are cheap and the type is freely passed by value.
class EventExpr {
public:
    enum class Kind { Var, Not, And, Or };

    static EventExpr var(std::string name);
    static EventExpr negation(EventExpr child);
    static EventExpr conjunction(EventExpr left, EventExpr right);
    static EventExpr disjunction(EventExpr left, EventExpr right);

    Kind kind() const;
    const std::string& name() const;  // Kind::Var only
    EventExpr child() const;          // Kind::Not only
    EventExpr left() const;           // And/Or only
    EventExpr right() const;          // And/Or only

    // Distinct variable names appearing in the formula, sorted.
    std::vector<std::string> support() const;

    // Prints with `!`, `&`, `|` and minimal parentheses; parse_event round-trips.
    std::string to_string() const;

private:
    struct Node;
    explicit EventExpr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
    std::shared_ptr<const Node> node_;
};

// Grammar (precedence ! > & > |, parentheses allowed):
//   expr    := or
//   or      := and (("|" | "or") and)*
//   and     := unary (("&" | "and") unary)*
//   unary   := ("!" | "not") unary | ident | "(" expr ")"
//   ident   := [A-Za-z_][A-Za-z0-9_]*   (except the keywords not/and/or)
// Throws ParseError with the byte offset of the first offending token.
EventExpr parse_event(std::string_view text);

// Standard Boolean semantics; DataError if `t` lacks a support variable.
bool evaluate(const EventExpr& e, const TruthAssignment& t);

// Semantic fingerprint: sorted *relevant* support plus the truth-table bits
// over it, e.g. canonical_key(p & q) == "p,q|0001". Two expressions get equal
// keys iff they have identical truth tables over the union of their supports;
// variables that never change the value (as in "p & (q | !q)") are dropped.
std::string canonical_key(const EventExpr& e, std::size_t cap = kDefaultSupportCap);

// All 2^n assignments over the joint support of `events`, n checked against
// `cap`. Variables are ordered lexicographically and the first variable acts
// as the most significant bit, so the all-false assignment comes first.
std::vector<TruthAssignment> enumerate_support_assignments(
    std::span<const EventExpr> events, std::size_t cap = kDefaultSupportCap);

// Joint sorted support of a set of expressions.
std::vector<std::string> joint_support(std::span<const EventExpr> events);

namespace detail {

// Expression compiled against a fixed variable ordering for tight loops.
// Bit j of the mask holds the value of vars[j], with vars[0] the most
// significant bit of an n-variable mask (matching assignment enumeration).
class CompiledExpr {
public:
    CompiledExpr(const EventExpr& e, std::span<const std::string> vars);
    bool eval(std::uint32_t mask) const { return eval_node(root_, mask); }

private:
    struct Op {
        EventExpr::Kind kind;
        std::uint32_t bit = 0;  // Var: mask with the variable's bit set
        int left = -1;
        int right = -1;
    };
    int compile(const EventExpr& e, std::span<const std::string> vars);
    bool eval_node(int idx, std::uint32_t mask) const;

    std::vector<Op> ops_;
    int root_ = -1;
};

} // namespace detail
} // namespace capagg
