#include <catch2/catch.hpp>

#include "cct/simplex.hpp"

using namespace cct;

TEST_CASE("pinned variable") {
    LinearProgram lp;
    auto x = lp.add_var("x");
    auto xm = lp.add_var("x_M");
    lp.add_row({{x, Rational(1)}, {xm, Rational(-1)}}, Relation::LessEq, 0);
    lp.add_row({{xm, Rational(1)}}, Relation::GreaterEq, 1);
    lp.add_row({{xm, Rational(1)}}, Relation::LessEq, 1);
    lp.objective[x] = 1;
    auto out = solve_lp(lp);
    REQUIRE(out.status == LpStatus::Optimal);
    CHECK(out.value == 1);
    CHECK(out.point[xm] == 1);
}

TEST_CASE("bound attained at an interval endpoint") {
    LinearProgram lp;
    auto x = lp.add_var("x");
    auto xm = lp.add_var("x_M");
    auto xn = lp.add_var("x_N");
    lp.add_row({{x, Rational(1)}, {xn, Rational(-1)}}, Relation::LessEq, 0);
    lp.add_row({{xm, Rational(1)}}, Relation::GreaterEq, 1);
    lp.add_row({{xm, Rational(1)}}, Relation::LessEq, 1);
    lp.add_row({{xn, Rational(1)}, {xm, -rat(3, 10)}}, Relation::GreaterEq, 0);
    lp.add_row({{xn, Rational(1)}, {xm, -rat(2, 5)}}, Relation::LessEq, 0);
    lp.objective[x] = 1;
    auto out = solve_lp(lp);
    REQUIRE(out.status == LpStatus::Optimal);
    CHECK(out.value == rat(2, 5));
}

TEST_CASE("infeasible system") {
    LinearProgram lp;
    auto xm = lp.add_var("x_M");
    lp.add_row({{xm, Rational(1)}}, Relation::GreaterEq, 1);
    lp.add_row({{xm, Rational(1)}}, Relation::LessEq, 0);
    lp.objective[xm] = 1;
    CHECK(solve_lp(lp).status == LpStatus::Infeasible);
}

TEST_CASE("unbounded detection") {
    LinearProgram lp;
    auto x = lp.add_var("x");
    auto y = lp.add_var("y");
    lp.add_row({{x, Rational(1)}, {y, Rational(-1)}}, Relation::LessEq, 0);
    lp.objective[x] = 1;
    CHECK(solve_lp(lp).status == LpStatus::Unbounded);
}

TEST_CASE("minimization and equality rows") {
    LinearProgram lp;
    auto a = lp.add_var("a");
    auto b = lp.add_var("b");
    lp.add_row({{a, Rational(1)}, {b, Rational(1)}}, Relation::Equal, 1);
    lp.add_row({{a, Rational(1)}}, Relation::LessEq, rat(3, 4));
    lp.objective[a] = 1;
    lp.maximize = false;
    auto out = solve_lp(lp);
    REQUIRE(out.status == LpStatus::Optimal);
    CHECK(out.value == 0);  // a = 0, b = 1
    lp.maximize = true;
    out = solve_lp(lp);
    REQUIRE(out.status == LpStatus::Optimal);
    CHECK(out.value == rat(3, 4));
    CHECK(out.point[a] + out.point[b] == 1);
}

TEST_CASE("free variables split correctly") {
    LinearProgram lp;
    auto z = lp.add_var("z", /*nonnegative=*/false);
    lp.add_row({{z, Rational(1)}}, Relation::GreaterEq, -3);
    lp.objective[z] = 1;
    lp.maximize = false;
    auto out = solve_lp(lp);
    REQUIRE(out.status == LpStatus::Optimal);
    CHECK(out.value == -3);
    CHECK(out.point[z] == -3);
}

TEST_CASE("degenerate problem terminates with an exact optimum") {
    // A classic cycling-prone instance; Bland's rule must terminate.
    LinearProgram lp;
    auto x1 = lp.add_var("x1");
    auto x2 = lp.add_var("x2");
    auto x3 = lp.add_var("x3");
    auto x4 = lp.add_var("x4");
    lp.add_row({{x1, rat(1, 2)}, {x2, rat(-11, 2)}, {x3, rat(-5, 2)}, {x4, Rational(9)}},
               Relation::LessEq, 0);
    lp.add_row({{x1, rat(1, 2)}, {x2, rat(-3, 2)}, {x3, rat(-1, 2)}, {x4, Rational(1)}},
               Relation::LessEq, 0);
    lp.add_row({{x1, Rational(1)}}, Relation::LessEq, 1);
    lp.objective = {{x1, Rational(10)}, {x2, Rational(-57)}, {x3, Rational(-9)}, {x4, Rational(-24)}};
    auto out = solve_lp(lp);
    REQUIRE(out.status == LpStatus::Optimal);
    CHECK(out.value == 1);
}

TEST_CASE("floating point solve matches the exact one on a small program") {
    LinearProgramT<double> lp;
    auto x = lp.add_var("x");
    auto y = lp.add_var("y");
    lp.add_row({{x, 1.0}, {y, 2.0}}, Relation::LessEq, 4.0);
    lp.add_row({{x, 3.0}, {y, 1.0}}, Relation::LessEq, 6.0);
    lp.objective = {{x, 1.0}, {y, 1.0}};
    auto out = solve_lp(lp);
    REQUIRE(out.status == LpStatus::Optimal);
    CHECK(out.value == Approx(2.8));  // optimum at (8/5, 6/5)
}

TEST_CASE("malformed row is rejected") {
    LinearProgram lp;
    lp.add_var("x");
    CHECK_THROWS_AS(lp.add_row({{5, Rational(1)}}, Relation::LessEq, 0), Error);
}
