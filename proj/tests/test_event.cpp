#include <doctest.h>

#include <random>
#include <set>

#include "capagg/event.hpp"

using namespace capagg;

TEST_CASE("parse maps operators with the right precedence") {
    const EventExpr e = parse_event("p & !q");
    REQUIRE(e.kind() == EventExpr::Kind::And);
    CHECK(e.left().kind() == EventExpr::Kind::Var);
    CHECK(e.left().name() == "p");
    CHECK(e.right().kind() == EventExpr::Kind::Not);
    CHECK(e.right().child().name() == "q");

    const EventExpr f = parse_event("p | q");
    REQUIRE(f.kind() == EventExpr::Kind::Or);
    CHECK(f.left().name() == "p");
    CHECK(f.right().name() == "q");

    // NOT > AND > OR: a | b & !c parses as a | (b & (!c)).
    const EventExpr g = parse_event("a | b & !c");
    REQUIRE(g.kind() == EventExpr::Kind::Or);
    CHECK(g.right().kind() == EventExpr::Kind::And);
    CHECK(g.right().right().kind() == EventExpr::Kind::Not);
}

TEST_CASE("parse accepts word operators and parentheses") {
    CHECK(canonical_key(parse_event("p and not q")) == canonical_key(parse_event("p & !q")));
    CHECK(canonical_key(parse_event("(p or q) and r")) ==
          canonical_key(parse_event("(p | q) & r")));
}

TEST_CASE("parse rejects malformed input with a position") {
    CHECK_THROWS_AS(parse_event(""), ParseError);
    CHECK_THROWS_AS(parse_event("   "), ParseError);
    CHECK_THROWS_AS(parse_event("p &"), ParseError);
    CHECK_THROWS_AS(parse_event("& p"), ParseError);
    CHECK_THROWS_AS(parse_event("p q"), ParseError);
    CHECK_THROWS_AS(parse_event("p # q"), ParseError);

    try {
        parse_event("p & (q");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.position() == 4);  // the unmatched open parenthesis
    }
}

TEST_CASE("evaluate follows Boolean semantics") {
    TruthAssignment t{{"p", true}, {"q", false}};
    CHECK(evaluate(parse_event("p & !q"), t) == true);
    CHECK(evaluate(parse_event("p | q"), TruthAssignment{{"p", false}, {"q", false}}) == false);
    CHECK(evaluate(parse_event("!p"), TruthAssignment{{"p", true}}) == false);
    CHECK_THROWS_AS(evaluate(parse_event("p & r"), t), DataError);
}

TEST_CASE("canonical keys identify semantic equality") {
    CHECK(canonical_key(parse_event("p & q")) == canonical_key(parse_event("q & p")));
    CHECK(canonical_key(parse_event("!!p")) == canonical_key(parse_event("p")));
    CHECK(canonical_key(parse_event("p")) != canonical_key(parse_event("q")));

    // Irrelevant variables drop out of the key.
    CHECK(canonical_key(parse_event("p & (q | !q)")) == canonical_key(parse_event("p")));
    // De Morgan.
    CHECK(canonical_key(parse_event("!(p & q)")) == canonical_key(parse_event("!p | !q")));
    // Constants collapse to a variable-free key.
    CHECK(canonical_key(parse_event("p | !p")) == canonical_key(parse_event("q | !q")));
    CHECK(canonical_key(parse_event("p & !p")) != canonical_key(parse_event("p | !p")));
    CHECK(canonical_key(parse_event("p & q")) == "p,q|0001");
}

TEST_CASE("assignment enumeration is exhaustive and ordered") {
    const std::vector<EventExpr> pair = {parse_event("p"), parse_event("!p")};
    CHECK(enumerate_support_assignments(pair).size() == 2);

    const std::vector<EventExpr> conj = {parse_event("p & q")};
    const auto assigns = enumerate_support_assignments(conj);
    REQUIRE(assigns.size() == 4);
    CHECK(assigns[0].at("p") == false);
    CHECK(assigns[0].at("q") == false);
    CHECK(assigns[1].at("p") == false);
    CHECK(assigns[1].at("q") == true);
    CHECK(assigns[3].at("p") == true);
    CHECK(assigns[3].at("q") == true);

    const std::vector<EventExpr> none;
    CHECK(enumerate_support_assignments(none).size() == 1);

    // Cap enforcement.
    std::vector<EventExpr> wide;
    for (int i = 0; i < 21; ++i) wide.push_back(EventExpr::var("v" + std::to_string(i)));
    CHECK_THROWS_AS(enumerate_support_assignments(wide, 20), SupportCapError);
}

namespace {

EventExpr random_ast(std::mt19937_64& rng, int depth) {
    static const std::vector<std::string> vars = {"a", "b", "c", "d", "e", "f"};
    const auto pick = [&rng](int n) { return static_cast<int>(rng() % static_cast<unsigned>(n)); };
    if (depth <= 0 || pick(4) == 0) return EventExpr::var(vars[static_cast<std::size_t>(pick(6))]);
    switch (pick(3)) {
    case 0: return EventExpr::negation(random_ast(rng, depth - 1));
    case 1:
        return EventExpr::conjunction(random_ast(rng, depth - 1), random_ast(rng, depth - 1));
    default:
        return EventExpr::disjunction(random_ast(rng, depth - 1), random_ast(rng, depth - 1));
    }
}

} // namespace

TEST_CASE("print/parse round-trips preserve meaning") {
    std::mt19937_64 rng(42);
    for (int i = 0; i < 500; ++i) {
        const EventExpr e = random_ast(rng, 6);
        const EventExpr back = parse_event(e.to_string());
        CHECK(canonical_key(back) == canonical_key(e));
    }
}

TEST_CASE("equal keys imply equal evaluation everywhere") {
    std::mt19937_64 rng(7);
    for (int i = 0; i < 200; ++i) {
        const EventExpr e1 = random_ast(rng, 5);
        const EventExpr e2 = random_ast(rng, 5);
        if (canonical_key(e1) != canonical_key(e2)) continue;
        const std::vector<EventExpr> both = {e1, e2};
        for (const TruthAssignment& t : enumerate_support_assignments(both))
            CHECK(evaluate(e1, t) == evaluate(e2, t));
    }
    // And a guaranteed-equal pair, exhaustively.
    const EventExpr a = parse_event("!(a & b) | (c & !c)");
    const EventExpr b = parse_event("!a | !b");
    REQUIRE(canonical_key(a) == canonical_key(b));
    const std::vector<EventExpr> both = {a, b};
    for (const TruthAssignment& t : enumerate_support_assignments(both))
        CHECK(evaluate(a, t) == evaluate(b, t));
}

namespace {

// Meaning-preserving rewrite of a random subtree: double negation, operand
// swap, De Morgan, or tautological padding.
EventExpr rewrite(std::mt19937_64& rng, const EventExpr& e) {
    switch (rng() % 5) {
    case 0: return EventExpr::negation(EventExpr::negation(e));
    case 1:
        if (e.kind() == EventExpr::Kind::And)
            return EventExpr::conjunction(e.right(), e.left());
        if (e.kind() == EventExpr::Kind::Or) return EventExpr::disjunction(e.right(), e.left());
        return e;
    case 2:
        if (e.kind() == EventExpr::Kind::And)
            return EventExpr::negation(EventExpr::disjunction(EventExpr::negation(e.left()),
                                                              EventExpr::negation(e.right())));
        if (e.kind() == EventExpr::Kind::Or)
            return EventExpr::negation(EventExpr::conjunction(EventExpr::negation(e.left()),
                                                              EventExpr::negation(e.right())));
        return e;
    case 3: {
        const EventExpr pad = EventExpr::var("pad");
        return EventExpr::conjunction(e, EventExpr::disjunction(pad, EventExpr::negation(pad)));
    }
    default: return e;
    }
}

} // namespace

TEST_CASE("meaning-preserving rewrites keep the canonical key") {
    std::mt19937_64 rng(99);
    for (int i = 0; i < 300; ++i) {
        const EventExpr e = random_ast(rng, 4);
        EventExpr r = e;
        const int steps = 1 + static_cast<int>(rng() % 3);
        for (int s = 0; s < steps; ++s) r = rewrite(rng, r);
        REQUIRE(canonical_key(r) == canonical_key(e));
        const std::vector<EventExpr> both = {e, r};
        for (const TruthAssignment& t : enumerate_support_assignments(both))
            CHECK(evaluate(e, t) == evaluate(r, t));
    }
}

TEST_CASE("enumeration yields exactly 2^n distinct assignments") {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 50; ++i) {
        std::vector<EventExpr> events;
        const int n_events = 1 + static_cast<int>(rng() % 5);
        for (int k = 0; k < n_events; ++k) events.push_back(random_ast(rng, 4));
        const std::size_t n = joint_support(events).size();
        const auto assigns = enumerate_support_assignments(events);
        std::set<TruthAssignment> distinct(assigns.begin(), assigns.end());
        CHECK(distinct.size() == assigns.size());
        CHECK(assigns.size() == (std::size_t{1} << n));
    }
}
