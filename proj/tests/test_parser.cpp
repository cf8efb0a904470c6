#include <gtest/gtest.h>

#include "magicdl/parser.hpp"
#include "support/programs.hpp"

using namespace magicdl;
using namespace magicdl::testing;

namespace {

std::string round_trip(const std::string& text) { return render(parse_program(text)); }

ParseError parse_error_of(const std::string& text) {
    try {
        parse_program(text);
    } catch (const ParseError& e) {
        return e;
    }
    ADD_FAILURE() << "no error for: " << text;
    return ParseError(0, 0, "", "");
}

}  // namespace

TEST(Parser, Pi1Rules) {
    auto program = parse_program(kPi1);
    ASSERT_EQ(program.rules.size(), 3u);
    const auto& r = program.rules[2];
    EXPECT_EQ(program.symbols->predicate_name(r.head.predicate), "c");
    ASSERT_EQ(r.body.size(), 2u);
    EXPECT_TRUE(is_positive_literal(r.body[0]));
    EXPECT_EQ(r.variable_names, (std::vector<std::string>{"X", "Y"}));
}

TEST(Parser, AggregateRule) {
    auto program = parse_program("total_cost(S) :- order(O), not cancelled(O), #sum{P,I : item(O,I,P)} = S.");
    const auto& rule = program.rules[0];
    ASSERT_EQ(rule.body.size(), 3u);
    EXPECT_TRUE(is_negative_literal(rule.body[1]));
    const auto& aggregate = std::get<Aggregate>(rule.body[2]);
    EXPECT_EQ(aggregate.head_terms.size(), 2u);
    EXPECT_EQ(aggregate.comparator, Comparator::equal);
    ASSERT_TRUE(aggregate.assignment_variable());
    EXPECT_EQ(rule.variable_names[index_of(*aggregate.assignment_variable())], "S");
}

TEST(Parser, EmptyProgram) {
    EXPECT_TRUE(parse_program("").rules.empty());
    EXPECT_TRUE(parse_program("  % just a comment\n\n").rules.empty());
}

TEST(Parser, Facts) {
    auto program = parse_program("p(a). q. r(1,-2).");
    ASSERT_EQ(program.rules.size(), 3u);
    for (const auto& rule : program.rules) EXPECT_TRUE(rule.is_fact());
    EXPECT_EQ(render(program), "p(a).\nq.\nr(1,-2).\n");
}

TEST(Parser, IntervalsExpand) {
    auto program = parse_program("edb(0..3).");
    ASSERT_EQ(program.rules.size(), 4u);
    EXPECT_EQ(render(program), "edb(0).\nedb(1).\nedb(2).\nedb(3).\n");
}

TEST(Parser, TwoIntervalsLastFastest) {
    auto program = parse_program("e(0..1, x, 5..6).");
    EXPECT_EQ(render(program), "e(0,x,5).\ne(0,x,6).\ne(1,x,5).\ne(1,x,6).\n");
}

TEST(Parser, IntervalErrors) {
    EXPECT_EQ(parse_error_of("p(X) :- q(0..2).").message(), "intervals are only allowed in facts");
    EXPECT_EQ(parse_error_of("p(0..2) :- q(1).").message(), "intervals are only allowed in facts");
    EXPECT_EQ(parse_error_of("p(X, 0..2).").message(), "interval facts must be ground");
    EXPECT_EQ(parse_error_of("p(3..1).").message(), "empty interval");
}

TEST(Parser, Query) {
    SymbolTable symbols;
    auto query = parse_query("c(0,Y)?", symbols);
    EXPECT_EQ(symbols.predicate_name(query.predicate), "c");
    ASSERT_EQ(query.terms.size(), 2u);
    EXPECT_TRUE(query.terms[0].is_constant());
    EXPECT_TRUE(query.terms[1].is_variable());
    EXPECT_NO_THROW(parse_query("c(0,Y)", symbols));
}

TEST(Parser, RenderRoundTrip) {
    for (const char* text : {kPi1, kPi2, kPi3, kR15, kShop, kAncestor}) {
        auto once = round_trip(text);
        EXPECT_EQ(once, round_trip(once));
    }
    EXPECT_EQ(round_trip(kPi3), kPi3);
    EXPECT_EQ(round_trip(kR15), kR15);
}

TEST(Parser, Comparators) {
    auto text =
        "p(X) :- q(X), #sum{Y : r(Y)} < X.\n"
        "p(X) :- q(X), #sum{Y : r(Y)} <= X.\n"
        "p(X) :- q(X), #sum{Y : r(Y)} != X.\n"
        "p(X) :- q(X), #sum{Y : r(Y)} >= X.\n"
        "p(X) :- q(X), #sum{Y : r(Y)} > X.\n"
        "p(X) :- q(X), #sum{Y : r(Y)} = X.\n";
    EXPECT_EQ(round_trip(text), text);
}

TEST(Parser, ErrorPositions) {
    auto e = parse_error_of("p(X) :- q(X)\nr(a).");
    EXPECT_EQ(e.line(), 2u);
    EXPECT_EQ(e.column(), 1u);
    EXPECT_EQ(e.token(), "r");

    e = parse_error_of("p(X) :- #count{X : q(X)} > 1.");
    EXPECT_EQ(e.message(), "unsupported aggregate");
    EXPECT_EQ(e.column(), 9u);
}

TEST(Parser, MagicNamesReserved) {
    EXPECT_EQ(parse_error_of("m#a#bf(X) :- q(X).").message(), "'#' is reserved for magic predicates");
    auto program = parse_magic("m#a#bf(X) :- q(X).");
    auto p = program.rules[0].head.predicate;
    ASSERT_TRUE(program.symbols->is_magic(p));
    EXPECT_EQ(program.symbols->predicate(p).magic->adornment, "bf");
    EXPECT_EQ(program.symbols->predicate_name(program.symbols->predicate(p).magic->base), "a");
    EXPECT_THROW(parse_magic("m#a#bx(X) :- q(X)."), ParseError);
    EXPECT_THROW(parse_magic("m#a#bb(X) :- q(X)."), ParseError);
}

TEST(Parser, AnonymousVariablesAreDistinct) {
    auto program = parse_program("p(X) :- q(X,_), r(_).");
    const auto& rule = program.rules[0];
    EXPECT_NE(atom_of(rule.body[0]).terms[1], atom_of(rule.body[1]).terms[0]);
}

TEST(Parser, VariablesArePerRule) {
    auto program = parse_program("p(X) :- q(X).\np(Y) :- r(Y).");
    EXPECT_EQ(program.rules[0].head.terms[0], program.rules[1].head.terms[0]);
}
