#include <catch2/catch.hpp>

#include <random>

#include "cct/io.hpp"
#include "cct/oracle.hpp"
#include "fixtures.hpp"

using namespace cct;

TEST_CASE("classical program dimensions") {
    SECTION("nine-node tree") {
        auto t = fixtures::kb_l();
        Query q(ConjunctiveEvent({std::vector<EventName>{"Q", "R", "S", "T", "U"}}),
                ConjunctiveEvent("M"));
        auto lp = build_classical_lp(t.kb(), q, true);
        CHECK(lp.var_names.size() == 512);
        // equalities count twice under the published convention (4n - 2 = 34)
        std::size_t count = 0;
        for (const auto& r : lp.rows) count += r.rel == Relation::Equal ? 2 : 1;
        CHECK(count == 34);
    }
    SECTION("tweety uses four worlds and a top normalization") {
        auto doc = parse_kb(fixtures::kTweety);
        Query q = parse_query("(ostrich | *)");
        auto lp = build_classical_lp(doc.kb, q, false);
        CHECK(lp.var_names.size() == 4);
        // top premise: the normalization row covers every world
        CHECK(lp.rows[0].coeffs.size() == 4);
    }
    SECTION("world cap") {
        std::vector<EventName> ev;
        for (int i = 0; i < 21; ++i) ev.push_back("E" + std::to_string(i));
        auto kb = KnowledgeBase::make(ev, {});
        Query q(ConjunctiveEvent("E1"), ConjunctiveEvent("E0"));
        CHECK_THROWS_AS(build_classical_lp(kb, q, true), Error);
    }
}

TEST_CASE("tweety bounds") {
    auto doc = parse_kb(fixtures::kTweety);
    auto oa = oracle_answer(doc.kb, parse_query("(ostrich | *)"));
    CHECK(!oa.approximate);
    CHECK(oa.answer.lower == rat(18, 25));
    CHECK(oa.answer.upper == 1);
}

TEST_CASE("empty consequence when the premise is forced to zero") {
    auto kb = KnowledgeBase::make(
        {"B", "C"},
        {ConditionalConstraint(ConjunctiveEvent("B"), ConjunctiveEvent::top(), 0, 0)});
    auto oa = oracle_answer(kb, Query(ConjunctiveEvent("C"), ConjunctiveEvent("B")));
    CHECK(oa.answer.empty_consequence);
    CHECK(oa.answer.lower == 1);
    CHECK(oa.answer.upper == 0);
}

TEST_CASE("satisfiability") {
    CHECK(satisfiable(fixtures::kb_l().kb()));
    SECTION("one-edge graph encoding is satisfiable") {
        auto kb = encode_3col(Graph::make({"a", "b"}, {{"a", "b"}}));
        CHECK(kb.events.size() == 7);
        CHECK(satisfiable(kb));
    }
    SECTION("empty graph gives the one-event base") {
        auto kb = encode_3col(Graph::make({}, {}));
        CHECK(kb.events == std::vector<EventName>{"B"});
        CHECK(kb.constraints.empty());
        CHECK(satisfiable(kb));
    }
}

TEST_CASE("three-colorability encoding counts") {
    Graph triangle = Graph::make({"a", "b", "c"}, {{"a", "b"}, {"b", "c"}, {"a", "c"}});
    auto kb3 = encode_3col(triangle);
    CHECK(kb3.events.size() == 10);
    CHECK(kb3.constraints.size() == 36);

    Graph k4 = Graph::make({"a", "b", "c", "d"}, {{"a", "b"},
                                                  {"a", "c"},
                                                  {"a", "d"},
                                                  {"b", "c"},
                                                  {"b", "d"},
                                                  {"c", "d"}});
    auto kb4 = encode_3col(k4);
    CHECK(kb4.events.size() == 13);
    // nine constraints per vertex plus three per edge
    CHECK(kb4.constraints.size() == 4 * 9 + 6 * 3);
}

TEST_CASE("positive model construction") {
    SECTION("single node") {
        auto t = ConstraintTree::validate(KnowledgeBase::make({"B"}, {}));
        auto pr = construct_positive_model(t);
        REQUIRE(pr.mass().size() == 1);
        CHECK(pr.prob(ConjunctiveEvent("B")) == 1);
    }
    SECTION("certain edge collapses to the two-corner table") {
        std::vector<ConditionalConstraint> cs{
            ConditionalConstraint(ConjunctiveEvent("C"), ConjunctiveEvent("B"), 1, 1),
            ConditionalConstraint(ConjunctiveEvent("B"), ConjunctiveEvent("C"), 1, 1)};
        auto t = ConstraintTree::validate(KnowledgeBase::make({"B", "C"}, cs));
        auto pr = construct_positive_model(t);
        REQUIRE(pr.mass().size() == 2);
        CHECK(pr.mass().at(0b00) == rat(1, 2));
        CHECK(pr.mass().at(0b11) == rat(1, 2));
        CHECK(check_kb(pr, t.kb()).empty());
    }
    SECTION("nine-node tree gets a verified positive model") {
        auto t = fixtures::kb_l();
        auto pr = construct_positive_model(t);
        CHECK(check_kb(pr, t.kb()).empty());
        CHECK(pr.prob(ConjunctiveEvent(t.events())) > 0);
    }
}

TEST_CASE("rescaling preserves modelhood") {
    std::vector<ConditionalConstraint> cs{
        ConditionalConstraint(ConjunctiveEvent("C"), ConjunctiveEvent("B"), 1, 1),
        ConditionalConstraint(ConjunctiveEvent("B"), ConjunctiveEvent("C"), 1, 1)};
    auto t = ConstraintTree::validate(KnowledgeBase::make({"B", "C"}, cs));
    auto pr = construct_positive_model(t);
    SECTION("identity at one") {
        auto same = rescale_model(pr, 1);
        CHECK(same.mass() == pr.mass());
    }
    SECTION("zero gives the trivial all-false mass") {
        auto trivial = rescale_model(pr, 0);
        REQUIRE(trivial.mass().size() == 1);
        CHECK(trivial.mass().at(0) == 1);
        CHECK(check_kb(trivial, t.kb()).empty());
    }
    SECTION("one half") {
        auto half = rescale_model(pr, rat(1, 2));
        CHECK(half.mass().at(0b00) == rat(3, 4));
        CHECK(half.mass().at(0b11) == rat(1, 4));
        CHECK(check_kb(half, t.kb()).empty());
    }
    SECTION("outside the unit interval") {
        CHECK_THROWS_AS(rescale_model(pr, rat(3, 2)), Error);
    }
}

TEST_CASE("random trees always have verified positive models") {
    std::mt19937 rng(101);
    for (int it = 0; it < 12; ++it) {
        auto t = fixtures::random_tree(rng, 2 + it % 8, it % 2 == 0);
        auto pr = construct_positive_model(t);
        CHECK(check_kb(pr, t.kb()).empty());
        CHECK(pr.prob(ConjunctiveEvent(t.events())) > 0);
        std::uniform_int_distribution<int> num(0, 6);
        auto scaled = rescale_model(pr, rat(num(rng), 6));
        CHECK(check_kb(scaled, t.kb()).empty());
    }
}

TEST_CASE("oracle never reports empty consequence on tree queries") {
    std::mt19937 rng(202);
    for (int it = 0; it < 10; ++it) {
        auto t = fixtures::random_tree(rng, 2 + it % 5, it % 2 == 0);
        auto q = fixtures::random_query(rng, t);
        auto oa = oracle_answer(t.kb(), q);
        CHECK(!oa.answer.empty_consequence);
        CHECK(oa.answer.lower <= oa.answer.upper);
    }
}

TEST_CASE("small graphs: encoding satisfiability matches brute-force colorability") {
    std::vector<Graph> graphs{
        Graph::make({}, {}),
        Graph::make({"a"}, {}),
        Graph::make({"a", "b"}, {{"a", "b"}}),
        Graph::make({"a", "b", "c"}, {{"a", "b"}, {"b", "c"}}),
        Graph::make({"a", "b", "c"}, {{"a", "b"}, {"b", "c"}, {"a", "c"}}),
        Graph::make({"a", "b", "c", "d"},
                    {{"a", "b"}, {"a", "c"}, {"a", "d"}, {"b", "c"}, {"b", "d"}}),
        Graph::make({"a", "b", "c", "d"},
                    {{"a", "b"}, {"a", "c"}, {"a", "d"}, {"b", "c"}, {"b", "d"}, {"c", "d"}}),
    };
    for (const auto& g : graphs) {
        CAPTURE(g.vertices.size(), g.edges.size());
        CHECK(satisfiable(encode_3col(g)) == fixtures::three_colorable(g));
    }
}
