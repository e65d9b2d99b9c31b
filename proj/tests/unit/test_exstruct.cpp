#include <gtest/gtest.h>

#include "support/oracles.hpp"

using namespace causalin;

namespace {

Event ev(const std::string& tag, const std::string& proc, const std::string& obj,
         const std::string& inv, const std::string& res)
{
    return Event{tag, proc, parse_invocation(obj, inv), parse_response(res)};
}

std::vector<Event> stacks_events()
{
    return {ev("A", "P1", "S'", "Pop", "11"), ev("B", "P1", "S", "Push(42)", "bot"),
            ev("C", "P2", "S", "Pop", "42"), ev("D", "P2", "S'", "Push(11)", "bot")};
}

ExecutionStructure with_communication()
{
    return ExecutionStructure::from_tag_pairs(stacks_events(), {{"A", "B"}, {"C", "D"}},
                                              {{"A", "B"}, {"C", "D"}, {"B", "C"}, {"D", "A"}});
}

}  // namespace

TEST(Axioms, PrecedenceOnlyStructureIsValid)
{
    auto s = ExecutionStructure::from_tag_pairs(stacks_events(), {{"A", "B"}, {"C", "D"}},
                                                {{"A", "B"}, {"C", "D"}});
    EXPECT_TRUE(validate_axioms(s).pass());
}

TEST(Axioms, CommunicationEdgesBreakA4)
{
    auto r = validate_axioms(with_communication());
    EXPECT_FALSE(r[Axiom::a4].pass());
    std::vector<EventTag> quad{"A", "B", "C", "D"};
    bool found = false;
    for (const auto& v : r[Axiom::a4].violations) {
        found = found || v.tuple == quad;
    }
    EXPECT_TRUE(found);
}

TEST(Axioms, A1RejectsReflexivePrecedence)
{
    auto s = ExecutionStructure::from_tag_pairs(stacks_events(), {{"A", "A"}}, {{"A", "A"}});
    EXPECT_FALSE(validate_axioms(s)[Axiom::a1].pass());
}

TEST(Axioms, A2RejectsMissingCommunication)
{
    auto s = ExecutionStructure::from_tag_pairs(stacks_events(), {{"A", "B"}}, {});
    auto r = validate_axioms(s);
    ASSERT_FALSE(r[Axiom::a2].pass());
    EXPECT_EQ(r[Axiom::a2].violations.front().tuple, (std::vector<EventTag>{"A", "B"}));
}

TEST(Closure, AddsPrecedenceThenReportsReversal)
{
    auto c = close(with_communication());
    ASSERT_FALSE(c.ok());
    EXPECT_EQ(c.failure->kind, ClosureFailure::Kind::soft_reversal);
    const auto& sat = c.failure->saturated;
    EXPECT_TRUE(sat.has_hard("C", "B"));
    EXPECT_TRUE(sat.has_hard("A", "D"));
    EXPECT_EQ(sat.hard_pairs().size(), 4u);
    EXPECT_THROW(c.value(), PreconditionFailed);
}

TEST(Closure, ValidStructureIsAFixpoint)
{
    auto s = ExecutionStructure::from_tag_pairs(stacks_events(), {{"A", "B"}, {"C", "D"}},
                                                {{"A", "B"}, {"C", "D"}, {"B", "C"}});
    auto c = close(s);
    ASSERT_TRUE(c.ok());
    auto again = close(c.value());
    ASSERT_TRUE(again.ok());
    EXPECT_EQ(again.value().hard_pairs(), c.value().hard_pairs());
    EXPECT_EQ(again.value().soft_pairs(), c.value().soft_pairs());
    EXPECT_TRUE(c.value().has_hard("A", "D"));
}

TEST(Closure, HardCycleFails)
{
    auto s = ExecutionStructure::from_tag_pairs(stacks_events(), {{"A", "B"}, {"B", "A"}}, {});
    auto c = close(s);
    ASSERT_FALSE(c.ok());
    EXPECT_EQ(c.failure->kind, ClosureFailure::Kind::hard_cycle);
}

TEST(ClosureProperty, AgreesWithNaiveFixpoint)
{
    oracle::Rng rng(11);
    std::size_t closed = 0;
    for (int round = 0; round < 400; ++round) {
        const int n = oracle::uniform(rng, 1, 6);
        oracle::Pairs h(n);
        oracle::Pairs s(n);
        for (int a = 0; a < n; ++a) {
            for (int b = 0; b < n; ++b) {
                if (a < b && oracle::coin(rng, 0.25)) {
                    h.set(a, b);
                }
                if (a != b && oracle::coin(rng, 0.2)) {
                    s.set(a, b);
                }
            }
        }
        std::vector<Event> events;
        for (int i = 0; i < n; ++i) {
            events.push_back(ev("e" + std::to_string(i), "P", "S", "Push(1)", "bot"));
        }
        auto got = close(ExecutionStructure(events, oracle::to_relation(h), oracle::to_relation(s)));
        auto want = oracle::close(h, s);
        ASSERT_EQ(got.ok(), want.has_value()) << "round " << round;
        if (want) {
            ++closed;
            ASSERT_EQ(got.value().hard(), oracle::to_relation(want->first));
            ASSERT_EQ(got.value().soft(), oracle::to_relation(want->second));
            ASSERT_TRUE(validate_axioms(got.value()).pass());
        }
    }
    EXPECT_GT(closed, 50u);
}

TEST(AxiomsProperty, AgreesWithLiteralCheck)
{
    oracle::Rng rng(12);
    for (int round = 0; round < 400; ++round) {
        const int n = oracle::uniform(rng, 1, 5);
        oracle::Pairs h(n);
        oracle::Pairs s(n);
        for (int a = 0; a < n; ++a) {
            for (int b = 0; b < n; ++b) {
                if (oracle::coin(rng, 0.15)) {
                    h.set(a, b);
                }
                if (oracle::coin(rng, 0.35)) {
                    s.set(a, b);
                }
            }
        }
        std::vector<Event> events;
        for (int i = 0; i < n; ++i) {
            events.push_back(ev("e" + std::to_string(i), "P", "S", "Pop", "1"));
        }
        ExecutionStructure st(events, oracle::to_relation(h), oracle::to_relation(s));
        ASSERT_EQ(validate_axioms(st).pass(), oracle::axioms_hold(h, s)) << "round " << round;
    }
}

TEST(Restrict, KeepsOnlyTheObject)
{
    auto s = ExecutionStructure::from_tag_pairs(stacks_events(), {{"A", "B"}, {"C", "D"}, {"C", "B"}},
                                                {{"A", "B"}, {"C", "D"}, {"C", "B"}});
    auto part = restrict(s, "S");
    ASSERT_EQ(part.size(), 2u);
    EXPECT_TRUE(part.has_hard("C", "B"));
    EXPECT_EQ(part.objects(), std::set<ObjectId>{"S"});
    EXPECT_THROW(restrict(s, "Q"), PreconditionFailed);
}

TEST(Refines, DropsPrecedenceAddsCommunication)
{
    auto a = ExecutionStructure::from_tag_pairs(stacks_events(), {{"A", "B"}}, {{"A", "B"}});
    auto b = ExecutionStructure::from_tag_pairs(stacks_events(), {}, {{"A", "B"}, {"C", "D"}});
    EXPECT_TRUE(refines(b, a));
    EXPECT_FALSE(refines(a, b));
    EXPECT_TRUE(refines(a, a));
}

TEST(Construction, DanglingAndDuplicateTags)
{
    EXPECT_THROW(ExecutionStructure::from_tag_pairs(stacks_events(), {{"A", "Z"}}, {}), MalformedInput);
    auto events = stacks_events();
    events.push_back(events.front());
    EXPECT_THROW(ExecutionStructure::from_tag_pairs(events, {}, {}), MalformedInput);
}

TEST(FromHistory, SequentialHistoryHasEqualRelations)
{
    auto h = History::from_sequence({
        HistoryAction::invoke("i1", "P1", {"S", "push", 1}),
        HistoryAction::respond("r1", "P1", "S", Response::bottom()),
        HistoryAction::invoke("i2", "P2", {"S", "pop", std::nullopt}),
        HistoryAction::respond("r2", "P2", "S", Response::of(1)),
    });
    auto s = from_history(h);
    EXPECT_EQ(s.hard(), s.soft());
    EXPECT_TRUE(s.has_hard("i1", "i2"));
    EXPECT_TRUE(validate_axioms(s).pass());
}

TEST(FromHistory, OverlapGivesMutualCommunication)
{
    auto h = History::from_sequence({
        HistoryAction::invoke("i1", "P1", {"S", "push", 1}),
        HistoryAction::invoke("i2", "P2", {"S", "pop", std::nullopt}),
        HistoryAction::respond("r1", "P1", "S", Response::bottom()),
        HistoryAction::respond("r2", "P2", "S", Response::of(1)),
    });
    auto s = from_history(h);
    EXPECT_TRUE(s.hard().empty());
    EXPECT_TRUE(s.has_soft("i1", "i2"));
    EXPECT_TRUE(s.has_soft("i2", "i1"));
    EXPECT_FALSE(s.has_soft("i1", "i1"));
}

TEST(FromHistory, PendingInvocationIsRejected)
{
    auto h = History::from_sequence({HistoryAction::invoke("i1", "P1", {"S", "pop", std::nullopt})});
    EXPECT_FALSE(h.complete());
    EXPECT_THROW(from_history(h), IncompleteHistory);
}

TEST(History, CyclicOrderIsMalformed)
{
    std::vector<HistoryAction> acts{HistoryAction::invoke("i1", "P1", {"S", "pop", std::nullopt}),
                                    HistoryAction::respond("r1", "P1", "S", Response::of(1))};
    EXPECT_THROW(History::from_tag_pairs(acts, {{"i1", "r1"}, {"r1", "i1"}}), MalformedInput);
}
