#include <gtest/gtest.h>

#include "causalin/causalin.hpp"
#include "support/oracles.hpp"

using namespace causalin;

TEST(Litmus, ParsesColumns)
{
    auto p = parse_litmus("litmus t\ninit x=0\nP0 | P1\nW x 1 | R[acq] x r0\n");
    EXPECT_EQ(p.name, "t");
    ASSERT_EQ(p.threads.size(), 2u);
    EXPECT_EQ(p.threads[0].code.size(), 1u);
    EXPECT_EQ(p.threads[1].code[0].ann, Annotation::acquire);
    EXPECT_EQ(p.threads[1].code[0].reg, "r0");
}

TEST(Litmus, PrintParseRoundTrip)
{
    auto p = parse_litmus(read_file(std::string(CAUSALIN_DEFAULT_CORPUS) + "/treiber-1p1p.litmus"));
    auto again = parse_litmus(print_litmus(p));
    EXPECT_EQ(again, p);
    oracle::Rng rng(5);
    for (int i = 0; i < 100; ++i) {
        auto q = parse_litmus(oracle::to_litmus(oracle::random_program(rng, 8), "rnd"));
        ASSERT_EQ(parse_litmus(print_litmus(q)), q);
    }
}

TEST(Litmus, ErrorsCarryPosition)
{
    try {
        parse_litmus("litmus t\nP0\nW x 1\nFROB x\n");
        FAIL() << "expected a parse error";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line, 4u);
        EXPECT_EQ(e.column, 1u);
    }
    EXPECT_THROW(parse_litmus("litmus t\nP0\ngoto nowhere\n"), ParseError);
    EXPECT_THROW(parse_litmus(""), ParseError);
}
