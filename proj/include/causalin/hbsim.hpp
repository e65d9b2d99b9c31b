#pragma once

#include <algorithm>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "causalin/c11.hpp"
#include "causalin/errors.hpp"
#include "causalin/seqspec.hpp"

namespace causalin {

/// A stage of the induction: membership of each event of D.
using Stage = std::vector<bool>;

inline std::vector<EventTag> stage_tags(const C11Execution& d, const Stage& z)
{
    std::vector<EventTag> out;
    for (std::size_t i = 0; i < z.size(); ++i) {
        if (z[i]) {
            out.push_back(d.event(i).tag);
        }
    }
    return out;
}

/// The invocation whose span contains memory event e, if any.
inline std::optional<std::size_t> operation_of(const C11Execution& d, std::size_t e)
{
    const auto& ev = d.event(e);
    if (ev.is_method()) {
        return std::nullopt;
    }
    try {
        return mu(d, ev.tag);
    } catch (const PreconditionFailed&) {
        return std::nullopt;
    }
}

/// The response closing the operation started by invocation i, if any.
inline std::optional<std::size_t> response_of(const C11Execution& d, std::size_t inv)
{
    bool after = false;
    for (auto i : d.process_events(d.event(inv).process)) {
        if (i == inv) {
            after = true;
        } else if (after && d.event(i).kind == EventKind::response) {
            return i;
        } else if (after && d.event(i).kind == EventKind::invocation) {
            break;
        }
    }
    return std::nullopt;
}

/// A candidate abstract state: object state, history, and the invocation
/// events behind the history entries (bookkeeping for clause 2b-iii).
struct SimState {
    ObjectState state;
    LabelSequence history;
    std::vector<std::size_t> operations;

    friend bool operator==(const SimState&, const SimState&) = default;
};

struct SimulationInstance {
    ObjectId object;
    OperationalObject operational;
    /// Conflict relation used for the causal obligation.
    SequentialObject spec;
    /// lp(i) for an invocation event i; nothing if i never takes effect.
    std::function<std::optional<std::size_t>(const C11Execution&, std::size_t)> lp;
    std::function<bool(const C11Execution&, const Relation& hb, const Stage&, const SimState&)> rho;
    /// Candidate states for a stage; ρ is checked on each.
    std::function<std::vector<SimState>(const C11Execution&, const Relation& hb, const Stage&)>
        synthesize;
};

struct SimFailure {
    std::vector<EventTag> stage;
    EventTag event;
    /// "1", "2a", "2b-i", "2b-ii", "2b-iii" or "lp".
    std::string clause;
    std::string detail;
};

struct SimReport {
    std::optional<SimFailure> failure;
    std::size_t stages = 0;
    std::size_t steps = 0;
    /// Largest number of states satisfying ρ at one stage.
    std::size_t max_rho_states = 0;
    /// False when only the stages of one linear extension were checked.
    bool exhaustive = true;

    bool pass() const { return !failure; }
};

struct SimOptions {
    /// Refuse executions with more events than this...
    std::size_t max_events = 18;
    /// ...unless falling back to the stages of one linear extension of hb.
    bool fallback = false;
};

namespace detail {

inline std::vector<Stage> downset_lattice(const Relation& hb)
{
    const auto n = hb.size();
    std::vector<Stage> order;
    std::set<Stage> seen;
    std::deque<Stage> queue{Stage(n, false)};
    seen.insert(queue.front());
    while (!queue.empty()) {
        auto z = std::move(queue.front());
        queue.pop_front();
        order.push_back(z);
        for (std::size_t e = 0; e < n; ++e) {
            if (z[e]) {
                continue;
            }
            bool enabled = true;
            for (std::size_t f = 0; f < n && enabled; ++f) {
                enabled = z[f] || !hb.contains(f, e);
            }
            if (!enabled) {
                continue;
            }
            auto next = z;
            next[e] = true;
            if (seen.insert(next).second) {
                queue.push_back(std::move(next));
            }
        }
    }
    return order;
}

}  // namespace detail

/// Checks the hb-simulation obligations on every down-closed stage Z and
/// every event e extending it.
inline SimReport check_hb_simulation(const C11Execution& d, const SimulationInstance& inst,
                                     const SimOptions& opt = {})
{
    require_valid_consistent(d);
    const auto n = d.size();
    const auto hb = derive(d).hb;
    SimReport rep;

    // lp and its inverse on this object's invocations.
    std::map<std::size_t, std::size_t> lp_of;
    std::map<std::size_t, std::size_t> op_at;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& e = d.event(i);
        if (e.kind != EventKind::invocation || e.invocation.object != inst.object) {
            continue;
        }
        auto p = inst.lp(d, i);
        if (!p) {
            continue;
        }
        auto owner = operation_of(d, *p);
        if (!owner || *owner != i) {
            rep.failure = SimFailure{{}, e.tag, "lp", "lp(" + e.tag + ") is outside its operation"};
            return rep;
        }
        lp_of[i] = *p;
        op_at[*p] = i;
    }

    auto fail = [&](const Stage& z, std::size_t e, std::string clause, std::string detail) {
        rep.failure = SimFailure{stage_tags(d, z), d.event(e).tag, std::move(clause), std::move(detail)};
        return rep;
    };

    Stage empty(n, false);
    SimState init{inst.operational.init, {}, {}};
    if (!inst.rho(d, hb, empty, init)) {
        rep.failure = SimFailure{{}, "", "1", "rho does not hold initially"};
        return rep;
    }

    std::vector<Stage> stages;
    if (n <= opt.max_events) {
        stages = detail::downset_lattice(hb);
    } else if (!opt.fallback) {
        throw BoundExceeded("events for hb-simulation", n, opt.max_events);
    } else {
        rep.exhaustive = false;
        Stage z(n, false);
        stages.push_back(z);
        for (std::size_t k = 0; k < n; ++k) {
            for (std::size_t e = 0; e < n; ++e) {
                bool enabled = !z[e];
                for (std::size_t f = 0; f < n && enabled; ++f) {
                    enabled = z[f] || !hb.contains(f, e);
                }
                if (enabled) {
                    z[e] = true;
                    stages.push_back(z);
                    break;
                }
            }
        }
    }
    rep.stages = stages.size();

    for (const auto& z : stages) {
        std::vector<SimState> holding;
        for (auto& c : inst.synthesize(d, hb, z)) {
            if (inst.rho(d, hb, z, c)) {
                holding.push_back(std::move(c));
            }
        }
        rep.max_rho_states = std::max(rep.max_rho_states, holding.size());
        for (std::size_t e = 0; e < n; ++e) {
            if (z[e]) {
                continue;
            }
            bool enabled = true;
            for (std::size_t f = 0; f < n && enabled; ++f) {
                enabled = z[f] || !hb.contains(f, e);
            }
            if (!enabled) {
                continue;
            }
            if (!rep.exhaustive) {
                // Only the next stage of the chosen extension.
                auto next = z;
                next[e] = true;
                if (std::find(stages.begin(), stages.end(), next) == stages.end()) {
                    continue;
                }
            }
            ++rep.steps;
            auto z2 = z;
            z2[e] = true;
            auto it = op_at.find(e);
            for (const auto& st : holding) {
                if (it == op_at.end()) {
                    if (!inst.rho(d, hb, z2, st)) {
                        return fail(z, e, "2a", "stutter step breaks rho");
                    }
                    continue;
                }
                const auto i = it->second;
                const auto& inv = d.event(i).invocation;
                auto next = inst.operational.step(st.state, st.history, inv);
                if (!next) {
                    return fail(z, e, "2b-i", "tau undefined for " + to_string(inv));
                }
                SimState st2{next->first, next->second, st.operations};
                st2.operations.push_back(i);
                if (!inst.rho(d, hb, z2, st2)) {
                    return fail(z, e, "2b-i", "linearization step breaks rho");
                }
                const auto& produced = st2.history.back();
                auto res = response_of(d, i);
                if (res && d.event(*res).response != produced.response) {
                    return fail(z, e, "2b-ii",
                                "tau responds " + to_string(produced.response) + " but " +
                                    d.event(*res).tag + " returns " +
                                    to_string(d.event(*res).response));
                }
                for (std::size_t k = 0; k < st.history.size(); ++k) {
                    if (inst.spec.conflict(st.history[k], produced) &&
                        !hb.contains(lp_of.at(st.operations[k]), e)) {
                        return fail(z, e, "2b-iii",
                                    "lp of " + d.event(st.operations[k]).tag +
                                        " is not hb-before " + d.event(e).tag);
                    }
                }
            }
        }
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Treiber stack

inline Location top_location(const ObjectId& object)
{
    return Location{object, {"Top"}};
}

/// latest_Z(x): the mo-maximal modification of x in Z.
inline std::optional<std::size_t> latest(const C11Execution& d, const Stage& z, const Location& x)
{
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < d.size(); ++i) {
        const auto& e = d.event(i);
        if (!z[i] || !e.is_mod() || e.location != x) {
            continue;
        }
        if (!best || d.mo().contains(*best, i)) {
            best = i;
        }
    }
    return best;
}

/// cval_Z(x); null when Z holds no modification of x.
inline Datum cval(const C11Execution& d, const Stage& z, const Location& x)
{
    auto l = latest(d, z, x);
    return l ? d.event(*l).wval : Datum::null();
}

/// stackOf_Z(p): values along the val/nxt chain from p until null.
inline ObjectState stack_of(const C11Execution& d, const Stage& z, Datum p)
{
    ObjectState out;
    std::set<std::string> seen;
    while (!p.is_null()) {
        if (p.kind != Datum::Kind::pointer) {
            throw InvariantViolation("stack link " + to_string(p) + " is not a pointer");
        }
        if (!seen.insert(p.pointee).second) {
            throw InvariantViolation("cycle in nxt chain at " + p.pointee);
        }
        Location node{p.pointee, {}};
        auto v = cval(d, z, node.field("val"));
        if (v.kind != Datum::Kind::integer) {
            throw InvariantViolation("node " + p.pointee + " has no integer val");
        }
        out.push_back(v.value);
        p = cval(d, z, node.field("nxt"));
    }
    return out;
}

/// The Treiber linearization point of invocation i: its successful CAS
/// on Top or, for a pop returning empty, its last read of Top.
inline std::optional<std::size_t> treiber_lp(const C11Execution& d, std::size_t inv)
{
    const auto& obj = d.event(inv).invocation.object;
    const auto top = top_location(obj);
    std::optional<std::size_t> update;
    std::optional<std::size_t> last_read;
    bool inside = false;
    for (auto i : d.process_events(d.event(inv).process)) {
        if (i == inv) {
            inside = true;
            continue;
        }
        if (!inside) {
            continue;
        }
        const auto& e = d.event(i);
        if (e.is_method()) {
            break;
        }
        if (e.location == top && e.kind == EventKind::update) {
            if (update) {
                throw InvariantViolation("two successful CAS in operation " + d.event(inv).tag);
            }
            update = i;
        }
        if (e.location == top && e.kind == EventKind::read) {
            last_read = i;
        }
    }
    if (update) {
        return update;
    }
    auto res = response_of(d, inv);
    if (res && d.event(*res).response.kind == Response::Kind::empty) {
        return last_read;
    }
    return std::nullopt;
}

/// The linearized operations of `object` in Z, ordered by hb of their lp
/// events (ties by position), with their labels from D.
inline std::vector<std::size_t> linearized_operations(const C11Execution& d, const Relation& hb,
                                                      const Stage& z, const ObjectId& object)
{
    std::vector<std::pair<std::size_t, std::size_t>> done;
    for (std::size_t i = 0; i < d.size(); ++i) {
        const auto& e = d.event(i);
        if (e.kind != EventKind::invocation || e.invocation.object != object) {
            continue;
        }
        if (auto p = treiber_lp(d, i); p && z[*p]) {
            done.emplace_back(*p, i);
        }
    }
    std::stable_sort(done.begin(), done.end(), [&](const auto& a, const auto& b) {
        return hb.contains(a.first, b.first) || (!hb.contains(b.first, a.first) && a.first < b.first);
    });
    std::vector<std::size_t> ops;
    for (const auto& [_, i] : done) {
        ops.push_back(i);
    }
    return ops;
}

struct TreiberPropsReport {
    /// Data representation: stackOf_Z(cval_Z(&Top)) equals τ replayed over
    /// the linearized operations.
    bool representation = false;
    /// Modifications of &Top in Z are totally ordered by hb.
    bool top_ordered = false;
    /// Every modification of &Top in Z is hb-before e (true if no e given
    /// or e is not an update of &Top).
    bool top_before_update = true;
    std::string detail;

    bool pass() const { return representation && top_ordered && top_before_update; }
};

inline bool treiber_top_ordered(const C11Execution& d, const Relation& hb, const Stage& z,
                           const Location& top)
{
    std::vector<std::size_t> mods;
    for (std::size_t i = 0; i < d.size(); ++i) {
        if (z[i] && d.event(i).is_mod() && d.event(i).location == top) {
            mods.push_back(i);
        }
    }
    return hb.total_on(mods);
}

inline TreiberPropsReport check_treiber_stage_props(const C11Execution& d, const Relation& hb,
                                                    const ObjectId& object, const Stage& z,
                                                    std::optional<std::size_t> e = std::nullopt)
{
    const auto top = top_location(object);
    TreiberPropsReport rep;
    rep.top_ordered = treiber_top_ordered(d, hb, z, top);
    try {
        auto s = stack_of(d, z, cval(d, z, top));
        auto op = operational_stack(object, StackVariant::returns_empty);
        ObjectState abstract = op.init;
        bool defined = true;
        for (auto i : linearized_operations(d, hb, z, object)) {
            auto r = op.tau(abstract, d.event(i).invocation);
            if (!r) {
                defined = false;
                break;
            }
            abstract = r->first;
        }
        rep.representation = defined && s == abstract;
        if (!rep.representation) {
            rep.detail = "representation differs from abstract state";
        }
    } catch (const InvariantViolation& ex) {
        rep.representation = false;
        rep.detail = ex.what();
    }
    if (e && d.event(*e).is_mod() && d.event(*e).location == top) {
        for (std::size_t m = 0; m < d.size(); ++m) {
            if (z[m] && d.event(m).is_mod() && d.event(m).location == top && !hb.contains(m, *e)) {
                rep.top_before_update = false;
                rep.detail = d.event(m).tag + " is not hb-before " + d.event(*e).tag;
            }
        }
    }
    return rep;
}

inline TreiberPropsReport check_treiber_stage_props(const C11Execution& d, const ObjectId& object,
                                                    const Stage& z,
                                                    std::optional<std::size_t> e = std::nullopt)
{
    return check_treiber_stage_props(d, derive(d).hb, object, z, e);
}

struct PropsScan {
    std::size_t stages = 0;
    std::size_t checks = 0;
    /// First failing stage, event (empty for the stage itself) and report.
    std::optional<std::tuple<std::vector<EventTag>, EventTag, TreiberPropsReport>> failure;

    bool pass() const { return !failure; }
};

/// Representation and Top ordering at every down-closed stage, and update
/// ordering on every lattice edge that adds an update of &Top.
inline PropsScan scan_treiber_props(const C11Execution& d, const ObjectId& object,
                                    const SimOptions& opt = {})
{
    require_valid_consistent(d);
    if (d.size() > opt.max_events) {
        throw BoundExceeded("events for stage scan", d.size(), opt.max_events);
    }
    const auto hb = derive(d).hb;
    PropsScan scan;
    for (const auto& z : detail::downset_lattice(hb)) {
        ++scan.stages;
        ++scan.checks;
        auto r = check_treiber_stage_props(d, hb, object, z);
        if (!r.pass()) {
            scan.failure.emplace(stage_tags(d, z), "", r);
            return scan;
        }
        for (std::size_t e = 0; e < d.size(); ++e) {
            bool enabled = !z[e];
            for (std::size_t f = 0; f < d.size() && enabled; ++f) {
                enabled = z[f] || !hb.contains(f, e);
            }
            if (!enabled || !d.event(e).is_mod() || d.event(e).location != top_location(object)) {
                continue;
            }
            ++scan.checks;
            auto r2 = check_treiber_stage_props(d, hb, object, z, e);
            if (!r2.pass()) {
                scan.failure.emplace(stage_tags(d, z), d.event(e).tag, r2);
                return scan;
            }
        }
    }
    return scan;
}

/// ρ(Z, (s, h)): s is the data representation of Z, &Top modifications in
/// Z are hb-ordered, and h lists the linearized operations in hb order of
/// their lp events.
inline SimulationInstance treiber_instance(const ObjectId& object, StackVariant variant,
                                           const ValueDomain& domain = default_domain(3))
{
    SimulationInstance inst;
    inst.object = object;
    inst.operational = operational_stack(object, variant);
    inst.spec = stack(object, variant, domain);
    inst.lp = [](const C11Execution& d, std::size_t i) { return treiber_lp(d, i); };
    auto expected_history = [object](const C11Execution& d, const Relation& hb, const Stage& z) {
        SimState st;
        for (auto i : linearized_operations(d, hb, z, object)) {
            auto res = response_of(d, i);
            if (!res) {
                throw PreconditionFailed("operation " + d.event(i).tag + " has no response");
            }
            st.history.push_back(Label{d.event(i).invocation, d.event(*res).response});
            st.operations.push_back(i);
        }
        return st;
    };
    inst.rho = [object, expected_history](const C11Execution& d, const Relation& hb,
                                          const Stage& z, const SimState& st) {
        const auto top = top_location(object);
        if (!treiber_top_ordered(d, hb, z, top)) {
            return false;
        }
        try {
            if (stack_of(d, z, cval(d, z, top)) != st.state) {
                return false;
            }
        } catch (const InvariantViolation&) {
            return false;
        }
        return expected_history(d, hb, z).history == st.history;
    };
    inst.synthesize = [object, expected_history](const C11Execution& d, const Relation& hb,
                                                 const Stage& z) {
        std::vector<SimState> out;
        try {
            auto st = expected_history(d, hb, z);
            st.state = stack_of(d, z, cval(d, z, top_location(object)));
            out.push_back(std::move(st));
        } catch (const InvariantViolation&) {
        }
        return out;
    };
    return inst;
}

}  // namespace causalin
