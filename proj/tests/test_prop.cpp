#include <doctest.h>

#include <random>

#include "qshield/prop.hpp"
#include "test_util.hpp"

using namespace qshield;

TEST_CASE("varset rejects duplicates and keeps order") {
    VarSet v({"p", "q", "r"});
    CHECK(v.size() == 3);
    CHECK(*v.index_of("p") == 0);
    CHECK(*v.index_of("r") == 2);
    CHECK(!v.index_of("x"));
    CHECK_THROWS_AS(VarSet({"p", "p"}), declaration_error);
}

TEST_CASE("letter bit layout: first variable is the most significant bit") {
    VarSet v({"p", "q"});
    Letter l(v, 0b10);
    CHECK(l.value("p"));
    CHECK(!l.value("q"));
    CHECK_THROWS_AS(l.value("z"), declaration_error);
}

TEST_CASE("eval_prop truth tables") {
    VarSet v({"p", "q"});
    auto p = PropFormula::var("p");
    auto q = PropFormula::var("q");
    // (p && !q) at {p=1,q=0}
    CHECK(eval_prop(PropFormula::conj(p, PropFormula::negate(q)), Letter(v, 0b10)));
    // (p <=> q) at {p=0,q=0}
    CHECK(eval_prop(PropFormula::iff(p, q), Letter(v, 0b00)));
    CHECK(!eval_prop(PropFormula::iff(p, q), Letter(v, 0b01)));
}

TEST_CASE("figure behaviour position 5 satisfies r && p && !q") {
    Trace t = testutil::rpq_trace();
    auto phi = PropFormula::conj(
        PropFormula::var("r"),
        PropFormula::conj(PropFormula::var("p"), PropFormula::negate(PropFormula::var("q"))));
    CHECK(eval_prop(phi, t.at(5)));
    CHECK(!eval_prop(phi, t.at(6)));
}

TEST_CASE("enumerate_letters canonical order") {
    VarSet empty{};
    CHECK(enumerate_letters(empty).size() == 1);

    VarSet one({"p"});
    auto ls1 = enumerate_letters(one);
    REQUIRE(ls1.size() == 2);
    CHECK(!ls1[0].value("p"));
    CHECK(ls1[1].value("p"));

    VarSet two({"p", "q"});
    auto ls2 = enumerate_letters(two);
    REQUIRE(ls2.size() == 4);
    // order 00, 01, 10, 11
    CHECK((!ls2[0].value("p") && !ls2[0].value("q")));
    CHECK((!ls2[1].value("p") && ls2[1].value("q")));
    CHECK((ls2[2].value("p") && !ls2[2].value("q")));
    CHECK((ls2[3].value("p") && ls2[3].value("q")));
}

TEST_CASE("enumerate_letters capacity") {
    std::vector<std::string> names;
    for (int i = 0; i < 17; ++i) names.push_back("v" + std::to_string(i));
    CHECK_THROWS_AS(VarSet{names}, capacity_error);
}

TEST_CASE("negation and rewrites preserve eval on all letters") {
    std::mt19937_64 rng(7);
    std::vector<std::string> names{"a", "b", "c"};
    VarSet v(names);
    for (int round = 0; round < 200; ++round) {
        PropFormula f = testutil::random_prop(rng, names, 5);
        PropFormula g = testutil::random_prop(rng, names, 3);
        for (const Letter& l : enumerate_letters(v)) {
            CHECK(eval_prop(PropFormula::negate(f), l) == !eval_prop(f, l));
            // De Morgan
            CHECK(eval_prop(PropFormula::negate(PropFormula::conj(f, g)), l) ==
                  eval_prop(PropFormula::disj(PropFormula::negate(f), PropFormula::negate(g)), l));
            // implication rewrite
            CHECK(eval_prop(PropFormula::implies(f, g), l) ==
                  eval_prop(PropFormula::disj(PropFormula::negate(f), g), l));
        }
    }
}

TEST_CASE("make_letter round trip") {
    VarSet v({"p", "q", "r"});
    LetterIndex bits = make_letter(v, {{"q", true}, {"p", false}, {"r", true}});
    CHECK(bits == 0b011);
    CHECK_THROWS_AS(make_letter(v, {{"p", true}}), declaration_error);
}
