#include <gtest/gtest.h>

#include "causalin/causalin.hpp"

using namespace causalin;

namespace {

std::vector<C11Execution> one_push_one_pop()
{
    auto p = treiber_program({{{"S", "push", 1}}, {{"S", "pop", std::nullopt}}}, StackVariant::blocking);
    return enumerate_executions(p, parse_bounds("retries=2,values=1"));
}

MemoryEvent top_update(const std::string& tag, const std::string& proc, const std::string& node)
{
    MemoryEvent e;
    e.tag = tag;
    e.process = proc;
    e.kind = EventKind::update;
    e.location = parse_location("S.Top");
    e.rval = Datum::null();
    e.wval = Datum::pointer(node);
    e.annotation = Annotation::release_acquire;
    e.object = "S";
    return e;
}

}  // namespace

TEST(Lattice, CountsDownSets)
{
    Relation chain(3);
    chain.insert(0, 1);
    chain.insert(1, 2);
    chain.insert(0, 2);
    EXPECT_EQ(detail::downset_lattice(chain).size(), 4u);
    EXPECT_EQ(detail::downset_lattice(Relation(3)).size(), 8u);
    Relation vee(3);
    vee.insert(0, 2);
    vee.insert(1, 2);
    EXPECT_EQ(detail::downset_lattice(vee).size(), 5u);
}

TEST(Treiber, SimulationHoldsOnSmallScope)
{
    auto all = one_push_one_pop();
    ASSERT_FALSE(all.empty());
    auto inst = treiber_instance("S", StackVariant::blocking, {1});
    for (const auto& d : all) {
        auto r = check_hb_simulation(d, inst);
        EXPECT_TRUE(r.pass()) << r.failure->clause << ": " << r.failure->detail;
        EXPECT_TRUE(r.exhaustive);
        EXPECT_GT(r.stages, 0u);
        EXPECT_TRUE(scan_treiber_props(d, "S").pass());
    }
}

TEST(Treiber, LinearizationPointIsTheSuccessfulCas)
{
    for (const auto& d : one_push_one_pop()) {
        for (std::size_t i = 0; i < d.size(); ++i) {
            if (d.event(i).kind != EventKind::invocation) {
                continue;
            }
            auto lp = treiber_lp(d, i);
            ASSERT_TRUE(lp);
            EXPECT_EQ(d.event(*lp).kind, EventKind::update);
            EXPECT_EQ(to_string(d.event(*lp).location), "S.Top");
        }
    }
}

TEST(Treiber, WrongLinearizationPointFails)
{
    auto inst = treiber_instance("S", StackVariant::blocking, {1});
    inst.lp = [](const C11Execution& d, std::size_t i) -> std::optional<std::size_t> {
        for (auto e : d.process_events(d.event(i).process)) {
            if (e > i && d.event(e).is_memory()) {
                return e;
            }
        }
        return std::nullopt;
    };
    std::size_t failures = 0;
    for (const auto& d : one_push_one_pop()) {
        auto r = check_hb_simulation(d, inst);
        if (!r.pass()) {
            ++failures;
            EXPECT_FALSE(r.failure->clause.empty());
        }
    }
    EXPECT_GT(failures, 0u);
}

TEST(Treiber, NonAtomicCasBreaksTotalOrderOnTop)
{
    MemoryEvent init;
    init.tag = "init:S.Top";
    init.process = init_process();
    init.kind = EventKind::write;
    init.location = parse_location("S.Top");
    init.wval = Datum::null();
    init.object = "S";
    std::vector<MemoryEvent> events{init, top_update("P0:0", "P0", "n0"), top_update("P1:0", "P1", "n1")};
    auto d = C11Execution::from_tag_pairs(events, {{"init:S.Top", "P0:0"}, {"init:S.Top", "P1:0"}},
                                          {{"init:S.Top", "P0:0"}, {"init:S.Top", "P1:0"}},
                                          {{"init:S.Top", "P0:0"}, {"init:S.Top", "P1:0"}, {"P0:0", "P1:0"}});
    EXPECT_TRUE(consistent(d).pass());
    EXPECT_FALSE(cas_atomicity_violations(d).empty());
    auto hb = derive(d).hb;
    EXPECT_FALSE(treiber_top_ordered(d, hb, Stage(3, true), parse_location("S.Top")));
    EXPECT_TRUE(treiber_top_ordered(d, hb, Stage{true, true, false}, parse_location("S.Top")));
}

TEST(Treiber, LargeExecutionsNeedFallback)
{
    auto d = one_push_one_pop().front();
    auto inst = treiber_instance("S", StackVariant::blocking, {1});
    SimOptions small;
    small.max_events = 4;
    EXPECT_THROW(check_hb_simulation(d, inst, small), BoundExceeded);
    EXPECT_THROW(scan_treiber_props(d, "S", small), BoundExceeded);
    small.fallback = true;
    auto r = check_hb_simulation(d, inst, small);
    EXPECT_TRUE(r.pass());
    EXPECT_FALSE(r.exhaustive);
}

TEST(Treiber, SimulationImpliesCausalLinearizability)
{
    auto p = treiber_program({{{"S", "push", 1}, {"S'", "pop", std::nullopt}},
                              {{"S'", "push", 2}, {"S", "pop", std::nullopt}}},
                             StackVariant::blocking);
    auto spec = spec_by_name("stack-blocking", {"S", "S'"}, {1, 2});
    std::size_t n = 0;
    for_each_execution(p, parse_bounds("retries=2,values=2"), [&](const C11Execution& d) {
        ++n;
        bool sim = true;
        for (const auto& x : {"S", "S'"}) {
            SimOptions opt;
            opt.fallback = true;
            sim = sim && check_hb_simulation(restrict_to_object(d, x),
                                             treiber_instance(x, StackVariant::blocking, {1, 2}), opt)
                             .pass();
        }
        if (sim) {
            EXPECT_TRUE(causally_linearizable(exec_structure(d), spec).linearizable);
        }
    });
    EXPECT_GT(n, 0u);
}
