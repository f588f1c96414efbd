#include <catch2/catch.hpp>

#include <map>
#include <random>

#include "cct/io.hpp"
#include "cct/oracle.hpp"
#include "cct/propagation.hpp"
#include "fixtures.hpp"

using namespace cct;

namespace {

/// |value - printed| <= 2/10000 absorbs the published table's display
/// rounding.
bool close4(const Rational& value, const char* printed) {
    Rational p = *parse_rational(printed);
    Rational d = value - p;
    if (d < 0) d = -d;
    return d <= rat(2, 10000);
}

ConstraintTree sub_opstu() {
    return *parse_kb(R"(tree
constraint (P | O) [0.85]
constraint (O | P) [0.95]
constraint (S | P) [0.85]
constraint (P | S) [0.95]
constraint (T | P) [0.85]
constraint (P | T) [0.95]
constraint (U | P) [0.85]
constraint (P | U) [1]
)")
                .tree;
}

}  // namespace

TEST_CASE("lower-bound propagation on the nine-node tree") {
    auto t = fixtures::kb_l();
    auto ot = orient(t, "M");
    auto alpha = h1_alpha_all(ot);
    CHECK(alpha[t.index_of("S")] == 1);
    CHECK(alpha[t.index_of("P")] == rat(11, 20));   // 0.55 fusion over S,T,U
    CHECK(alpha[t.index_of("O")] == rat(33, 95));   // 0.3474
    CHECK(alpha[t.index_of("N")] == rat(363, 1900));
    CHECK(alpha[t.index_of("M")] == rat(273, 16150));
    CHECK(close4(alpha[t.index_of("M")], "0.0169"));
}

TEST_CASE("upper-bound triples on the nine-node tree") {
    auto t = fixtures::kb_l();
    auto ot = orient(t, "M");
    auto triples = h2_triple_all(ot);
    auto rows = propagation_rows(ot, h1_alpha_all(ot), &triples);
    auto find = [&](const char* node, const char* closure,
                    const char* rule) -> const PropagationRow& {
        for (const auto& r : rows)
            if (r.node == node && r.closure == closure && r.rule == std::string(rule)) return r;
        FAIL("row not found");
        return rows[0];
    };
    SECTION("chaining at P toward U") {
        const auto& r = find("P", "U", "CHAINING");
        CHECK(r.upper->alpha2 == rat(17, 20));
        CHECK(r.upper->beta2 == 0);
        CHECK(r.upper->gamma2 == rat(17, 20));
    }
    SECTION("chaining at O toward R exceeds one") {
        const auto& r = find("O", "R", "CHAINING");
        CHECK(r.upper->beta2 == rat(323, 60));  // 5.3833
        CHECK(r.upper->gamma2 == rat(19, 3));   // 6.3333
    }
    SECTION("fusion at O") {
        const auto& r = find("O", "QRSTU", "FUSION");
        CHECK(close4(r.alpha1, "0.3474"));
        CHECK(r.upper->alpha2 == rat(289, 380));  // 0.7605
        CHECK(r.upper->beta2 == rat(17, 380));    // 0.0447
        CHECK(r.upper->gamma2 == rat(289, 380));
    }
    SECTION("non-exact trees are rejected") {
        std::mt19937 rng(3);
        auto g = fixtures::random_tree(rng, 4, false);
        REQUIRE(!g.exact());
        CHECK_THROWS_AS(h2_triple_all(orient(g, g.events()[0])), Error);
    }
}

TEST_CASE("the full published table reproduces to four decimals") {
    // stratum, node, closure, a1, a2, b2, g2, rule
    struct Expected {
        std::size_t stratum;
        const char *node, *closure, *a1, *a2, *b2, *g2, *rule;
    };
    const Expected table[] = {
        {0, "S", "S", "1.0000", "1.0000", "0.0000", "1.0000", "LEAF"},
        {0, "T", "T", "1.0000", "1.0000", "0.0000", "1.0000", "LEAF"},
        {0, "U", "U", "1.0000", "1.0000", "0.0000", "1.0000", "LEAF"},
        {1, "P", "S", "0.8500", "0.8500", "0.0447", "0.8947", "CHAINING"},
        {1, "P", "T", "0.8500", "0.8500", "0.0447", "0.8947", "CHAINING"},
        {1, "P", "U", "0.8500", "0.8500", "0.0000", "0.8500", "CHAINING"},
        {1, "P", "STU", "0.5500", "0.8500", "0.0000", "0.8500", "FUSION"},
        {1, "Q", "Q", "1.0000", "1.0000", "0.0000", "1.0000", "LEAF"},
        {1, "R", "R", "1.0000", "1.0000", "0.0000", "1.0000", "LEAF"},
        {2, "O", "STU", "0.4474", "0.7605", "0.0447", "0.7605", "CHAINING"},
        {2, "O", "Q", "0.9500", "0.9500", "0.0500", "1.0000", "CHAINING"},
        {2, "O", "R", "0.9500", "0.9500", "5.3833", "6.3333", "CHAINING"},
        {2, "O", "QRSTU", "0.3474", "0.7605", "0.0447", "0.7605", "FUSION"},
        {3, "N", "QRSTU", "0.1911", "0.4183", "0.0246", "0.4183", "CHAINING"},
        {4, "M", "QRSTU", "0.0169", "0.1722", "0.0719", "0.1722", "CHAINING"},
    };
    auto t = fixtures::kb_l();
    auto ot = orient(t, "M");
    auto alpha = h1_alpha_all(ot);
    auto triples = h2_triple_all(ot);
    auto rows = propagation_rows(ot, alpha, &triples);
    REQUIRE(rows.size() == 15);
    for (const auto& e : table) {
        bool found = false;
        for (const auto& r : rows) {
            if (r.node != e.node || r.closure != e.closure || r.rule != std::string(e.rule))
                continue;
            found = true;
            CAPTURE(e.node, e.closure, e.rule);
            CHECK(r.stratum == e.stratum);
            CHECK(close4(r.alpha1, e.a1));
            CHECK(close4(r.upper->alpha2, e.a2));
            CHECK(close4(r.upper->beta2, e.b2));
            CHECK(close4(r.upper->gamma2, e.g2));
        }
        CAPTURE(e.node, e.closure, e.rule);
        CHECK(found);
    }
}

TEST_CASE("upper-triple internal inequalities hold on random exact trees") {
    std::mt19937 rng(31);
    for (int it = 0; it < 30; ++it) {
        auto t = fixtures::random_tree(rng, 2 + it % 8, true);
        auto ot = orient(t, t.events()[it % t.size()]);
        for (const auto& tr : h2_triple_all(ot)) {
            CHECK(tr.alpha2 <= tr.gamma2);
            CHECK(tr.beta2 <= tr.gamma2);
            CHECK(tr.gamma2 <= tr.alpha2 + tr.beta2);
        }
    }
}

TEST_CASE("conclusion-side lower bounds") {
    SECTION("leaves give one") {
        auto t = ConstraintTree::validate(KnowledgeBase::make({"B"}, {}));
        CHECK(h1_delta(orient(t, "B"), "B") == 1);
    }
    SECTION("star fusion gives 18/19") {
        auto t = fixtures::star_oqr();
        CHECK(h1_delta(orient(t, "O"), "O") == rat(18, 19));
    }
    SECTION("five-node subtree gives 138/149") {
        auto sub = *parse_kb(R"(tree
constraint (N | M) [0.35]
constraint (M | N) [0.85]
constraint (O | N) [0.55]
constraint (N | O) [1]
constraint (Q | O) [0.95]
constraint (O | Q) [0.95]
constraint (R | O) [0.95]
constraint (O | R) [0.15]
)")
                        .tree;
        CHECK(h1_delta(orient(sub, "O"), "O") == rat(138, 149));
        CHECK(close4(rat(138, 149), "0.9262"));
    }
    SECTION("zero reverse bound is a precondition error") {
        auto t = *parse_kb(R"(tree
constraint (Q | O) [0.4]
constraint (O | Q) [0.5]
constraint (R | O) [0.4]
constraint (O | R) [0.5]
)")
                     .tree;
        CHECK_THROWS_AS(h1_delta(orient(t, "O"), "O"), Error);
    }
}

TEST_CASE("premise-restricted answers on exact trees") {
    SECTION("nine-node root query") {
        auto t = fixtures::kb_l();
        Query q(ConjunctiveEvent({std::vector<EventName>{"Q", "R", "S", "T", "U"}}),
                ConjunctiveEvent("M"));
        auto ans = answer_premise_restricted_exact(t, q);
        CHECK(ans.lower == rat(273, 16150));
        CHECK(close4(ans.lower, "0.0169"));
        CHECK(close4(ans.upper, "0.1722"));
    }
    SECTION("two-node tree collapses to the edge value") {
        auto t = *parse_kb("tree\nconstraint (C | B) [0.7]\nconstraint (B | C) [0.4]\n").tree;
        auto ans = answer_premise_restricted_exact(
            t, Query(ConjunctiveEvent("C"), ConjunctiveEvent("B")));
        CHECK(ans.lower == rat(7, 10));
        CHECK(ans.upper == rat(7, 10));
    }
    SECTION("subtree query at O") {
        auto ans = answer_premise_restricted_exact(
            sub_opstu(), Query(ConjunctiveEvent({std::vector<EventName>{"S", "T", "U"}}),
                               ConjunctiveEvent("O")));
        CHECK(ans.lower == rat(17, 38));
        CHECK(close4(ans.lower, "0.4474"));
        CHECK(ans.upper == rat(289, 380));
        CHECK(close4(ans.upper, "0.7605"));
    }
    SECTION("classification mismatch") {
        auto t = fixtures::kb_l();
        Query q(ConjunctiveEvent("O"),
                ConjunctiveEvent({std::vector<EventName>{"Q", "R", "S", "T", "U"}}));
        CHECK_THROWS_AS(answer_premise_restricted_exact(t, q), Error);
    }
}

TEST_CASE("strongly conclusion-restricted answers") {
    SECTION("case 1: positive reverse bound") {
        auto t = fixtures::star_oqr();
        Query q(ConjunctiveEvent("O"), ConjunctiveEvent({std::vector<EventName>{"Q", "R"}}));
        auto ans = answer_strongly_conclusion_restricted(t, q);
        CHECK(ans.lower == rat(18, 19));
        CHECK(ans.upper == 1);
        auto oa = oracle_answer(t.kb(), q);
        CHECK(oa.answer.lower == ans.lower);
        CHECK(oa.answer.upper == ans.upper);
    }
    SECTION("case 2: certain path forces one") {
        auto t = *parse_kb(R"(tree
constraint (Q | O) [0.4]
constraint (O | Q) [1]
constraint (R | O) [0.4]
constraint (O | R) [0.5]
)")
                     .tree;
        Query q(ConjunctiveEvent("O"), ConjunctiveEvent({std::vector<EventName>{"Q", "R"}}));
        auto ans = answer_strongly_conclusion_restricted(t, q);
        CHECK(ans.lower == 1);
        CHECK(ans.upper == 1);
        auto oa = oracle_answer(t.kb(), q);
        CHECK(oa.answer.lower == 1);
        CHECK(oa.answer.upper == 1);
    }
    SECTION("case 3: otherwise zero to one") {
        auto t = *parse_kb(R"(tree
constraint (Q | O) [0.4]
constraint (O | Q) [0.5]
constraint (R | O) [0.4]
constraint (O | R) [0.5]
)")
                     .tree;
        Query q(ConjunctiveEvent("O"), ConjunctiveEvent({std::vector<EventName>{"Q", "R"}}));
        auto ans = answer_strongly_conclusion_restricted(t, q);
        CHECK(ans.lower == 0);
        CHECK(ans.upper == 1);
        auto oa = oracle_answer(t.kb(), q);
        CHECK(oa.answer.lower == 0);
        CHECK(oa.answer.upper == 1);
    }
}

TEST_CASE("exact propagation equals the brute-force bounds on random trees") {
    std::mt19937 rng(47);
    int done = 0;
    for (int it = 0; done < 20 && it < 200; ++it) {
        auto t = fixtures::random_tree(rng, 2 + it % 7, true);
        auto leaves = t.leaves();
        const EventName& e = leaves[it % leaves.size()];
        std::vector<EventName> f;
        for (const auto& l : leaves)
            if (l != e) f.push_back(l);
        if (f.empty()) continue;
        Query q{ConjunctiveEvent(f), ConjunctiveEvent(e)};
        auto ans = answer_premise_restricted_exact(t, q);
        auto oa = oracle_answer(t.kb(), q);
        CAPTURE(t.kb().constraints.size(), q.text());
        CHECK(ans.lower == oa.answer.lower);
        CHECK(ans.upper == oa.answer.upper);
        ++done;
    }
    CHECK(done == 20);
}

TEST_CASE("lower endpoints alone give the exact lower bound on interval trees") {
    std::mt19937 rng(53);
    int done = 0;
    for (int it = 0; done < 20 && it < 200; ++it) {
        auto t = fixtures::random_tree(rng, 2 + it % 6, false);
        auto leaves = t.leaves();
        const EventName& e = leaves[it % leaves.size()];
        std::vector<EventName> f;
        for (const auto& l : leaves)
            if (l != e) f.push_back(l);
        if (f.empty()) continue;
        auto ot = orient(t, e);
        auto alpha = h1_alpha_all(ot);
        Query q{ConjunctiveEvent(f), ConjunctiveEvent(e)};
        auto oa = oracle_answer(t.kb(), q);
        CHECK(alpha[ot.root()] == oa.answer.lower);
        ++done;
    }
    CHECK(done == 20);
}

TEST_CASE("propagation touches every node exactly once") {
    std::mt19937 rng(59);
    auto t = fixtures::random_tree(rng, 40, true);
    auto ot = orient(t, t.events()[0]);
    // each node appears exactly once in the processing order
    std::set<std::size_t> seen(ot.order().begin(), ot.order().end());
    CHECK(seen.size() == t.size());
}
