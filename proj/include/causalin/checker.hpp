#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "causalin/errors.hpp"
#include "causalin/exstruct.hpp"
#include "causalin/seqspec.hpp"

namespace causalin {

/// Why candidate orders were rejected. Each candidate is counted once, in
/// the bucket of the first check it fails while being built in tag order
/// (hard order, then legality, then communication).
struct Rejections {
    std::uint64_t illegal = 0;
    std::uint64_t hard_violated = 0;
    std::uint64_t soft_missing = 0;

    std::uint64_t total() const { return illegal + hard_violated + soft_missing; }

    friend bool operator==(const Rejections&, const Rejections&) = default;
};

struct LinWitness {
    bool linearizable = false;
    /// The witnessing sequence k when linearizable.
    std::vector<Event> sequence;
    /// Filled in on a negative verdict; sums to n! then.
    Rejections rejections;
    std::uint64_t candidates = 0;

    std::vector<EventTag> tags() const
    {
        std::vector<EventTag> out;
        for (const auto& e : sequence) {
            out.push_back(e.tag);
        }
        return out;
    }
};

struct CheckOptions {
    /// Refuse structures violating A1-A4.
    bool require_valid = true;
    /// Lift the event-count guard.
    bool force = false;
    std::size_t max_events = 10;
};

namespace detail {

inline std::uint64_t factorial(std::size_t n)
{
    std::uint64_t f = 1;
    for (std::size_t i = 2; i <= n; ++i) {
        f *= i;
    }
    return f;
}

inline void check_preconditions(const ExecutionStructure& s, const CheckOptions& opt)
{
    if (s.size() > opt.max_events && !opt.force) {
        throw BoundExceeded("refusing to enumerate " + std::to_string(s.size()) +
                                "! candidate orders; pass force to override",
                            s.size(), opt.max_events);
    }
    for (const auto& e : s.events()) {
        if (!e.complete()) {
            throw IncompleteHistory("event '" + e.tag + "' is incomplete; use complete_and_check");
        }
    }
    if (opt.require_valid && !validate_axioms(s).pass()) {
        throw PreconditionFailed("not an execution structure (run validate_axioms)");
    }
}

/// Depth-first search over permutations in tag order. With use_soft off
/// only legality and the hard order are required.
inline LinWitness search_linearization(const ExecutionStructure& s, const SequentialObject& spec,
                                       bool use_soft)
{
    const auto n = s.size();
    LinWitness w;
    w.candidates = factorial(n);
    std::vector<Label> labels;
    for (const auto& e : s.events()) {
        labels.push_back(e.label());
    }
    std::vector<std::vector<bool>> conflict(n, std::vector<bool>(n, false));
    if (use_soft) {
        for (std::size_t a = 0; a < n; ++a) {
            for (std::size_t b = 0; b < n; ++b) {
                conflict[a][b] = a != b && spec.conflict(labels[a], labels[b]);
            }
        }
    }
    std::vector<std::size_t> prefix;
    std::vector<bool> used(n, false);

    std::function<bool(const SequentialObject::State&)> go = [&](const SequentialObject::State& st) {
        if (prefix.size() == n) {
            return true;
        }
        const auto weight = factorial(n - prefix.size() - 1);
        for (std::size_t e = 0; e < n; ++e) {
            if (used[e]) {
                continue;
            }
            bool hard_ok = true;
            for (std::size_t f = 0; f < n && hard_ok; ++f) {
                hard_ok = used[f] || !s.hard().contains(f, e);
            }
            if (!hard_ok) {
                w.rejections.hard_violated += weight;
                continue;
            }
            auto next = spec.advance(st, labels[e]);
            if (!next) {
                w.rejections.illegal += weight;
                continue;
            }
            bool soft_ok = true;
            for (auto f : prefix) {
                if (conflict[f][e] && !s.soft().contains(f, e)) {
                    soft_ok = false;
                    break;
                }
            }
            if (!soft_ok) {
                w.rejections.soft_missing += weight;
                continue;
            }
            used[e] = true;
            prefix.push_back(e);
            if (go(*next)) {
                return true;
            }
            prefix.pop_back();
            used[e] = false;
        }
        return false;
    };

    if (go(spec.initial())) {
        w.linearizable = true;
        w.rejections = {};
        for (auto i : prefix) {
            w.sequence.push_back(s.event(i));
        }
    }
    return w;
}

}  // namespace detail

/// Causal linearizability: a legal k over exactly the events of s with
/// hard ⊆ ⟹_k and ≺_k ⊆ soft. Returns the first such k in tag order, or
/// the rejection statistics.
inline LinWitness causally_linearizable(const ExecutionStructure& s, const SequentialObject& spec,
                                        const CheckOptions& opt = {})
{
    detail::check_preconditions(s, opt);
    return detail::search_linearization(s, spec, true);
}

/// Linearizability of a partially ordered structure in the real-time sense:
/// a legal sequence extending hard, communication ignored.
inline LinWitness real_time_linearizable(const ExecutionStructure& s, const SequentialObject& spec,
                                         const CheckOptions& opt = {})
{
    detail::check_preconditions(s, opt);
    return detail::search_linearization(s, spec, false);
}

/// Independent re-check of a witness: same events, legal, hard ⊆ ⟹_k,
/// ≺_k ⊆ soft.
inline bool witness_valid(const ExecutionStructure& s, const SequentialObject& spec,
                          const std::vector<Event>& k)
{
    if (k.size() != s.size()) {
        return false;
    }
    std::map<EventTag, std::size_t> pos;
    for (std::size_t i = 0; i < k.size(); ++i) {
        auto j = s.index_of(k[i].tag);
        if (!j || !(s.event(*j) == k[i]) || !pos.emplace(k[i].tag, i).second) {
            return false;
        }
    }
    if (!spec.legal(labels_of(k))) {
        return false;
    }
    for (const auto& [a, b] : s.hard_pairs()) {
        if (pos.at(a) >= pos.at(b)) {
            return false;
        }
    }
    for (const auto& [a, b] : causal_order(spec, k)) {
        if (!s.has_soft(a, b)) {
            return false;
        }
    }
    return true;
}

// ---------------------------------------------------------------------------
// Classical linearizability

struct ClassicVerdict {
    bool linearizable = false;
    /// Invocation tags of the operations in the witnessing sequential order.
    std::vector<EventTag> order;
    std::uint64_t candidates = 0;
};

/// Linearizability of a totally ordered complete history: some legal
/// sequential order of its operations that keeps every response-before-
/// invocation pair of h (which also fixes per-process order).
inline ClassicVerdict classically_linearizable(const History& h, const SequentialObject& spec,
                                               const CheckOptions& opt = {})
{
    if (!h.total()) {
        throw PreconditionFailed("history is not totally ordered");
    }
    auto ops = h.matching_pairs();
    for (const auto& op : ops) {
        if (!op.response) {
            throw IncompleteHistory("invocation '" + h.action(op.invocation).tag + "' is pending");
        }
    }
    if (ops.size() > opt.max_events && !opt.force) {
        throw BoundExceeded("too many operations for permutation search", ops.size(),
                            opt.max_events);
    }
    std::vector<Label> labels;
    for (const auto& op : ops) {
        labels.push_back(Label{h.action(op.invocation).invocation, h.action(*op.response).response});
    }
    ClassicVerdict v;
    std::vector<std::size_t> perm(ops.size());
    std::iota(perm.begin(), perm.end(), 0);
    do {
        ++v.candidates;
        std::vector<std::size_t> pos(ops.size());
        for (std::size_t i = 0; i < perm.size(); ++i) {
            pos[perm[i]] = i;
        }
        bool ok = true;
        for (std::size_t a = 0; a < ops.size() && ok; ++a) {
            for (std::size_t b = 0; b < ops.size() && ok; ++b) {
                if (a != b && h.order().contains(*ops[a].response, ops[b].invocation)) {
                    ok = pos[a] < pos[b];
                }
            }
        }
        if (!ok) {
            continue;
        }
        LabelSequence k;
        for (auto i : perm) {
            k.push_back(labels[i]);
        }
        if (spec.legal(k)) {
            v.linearizable = true;
            for (auto i : perm) {
                v.order.push_back(h.action(ops[i].invocation).tag);
            }
            return v;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return v;
}

struct EquivalenceReport {
    bool classic = false;
    bool causal = false;

    bool agree() const { return classic == causal; }
};

/// Runs both checkers on a totally ordered complete history.
inline EquivalenceReport equiv_total_order(const History& h, const SequentialObject& spec,
                                           const CheckOptions& opt = {})
{
    EquivalenceReport r;
    r.classic = classically_linearizable(h, spec, opt).linearizable;
    auto closed = close(from_history(h));
    if (!closed.ok()) {
        throw InvariantViolation("exec(h) of a well-formed history failed to close: " +
                                 describe(*closed.failure));
    }
    r.causal = causally_linearizable(closed.value(), spec, opt).linearizable;
    return r;
}

// ---------------------------------------------------------------------------
// Incomplete structures

/// A sequential object with allowable incomplete invocations and, for
/// each, the labels that may complete it.
struct CompletableExtension {
    SequentialObject base;
    std::function<bool(const Invocation&)> allowable;
    std::function<std::vector<Label>(const Invocation&)> completions;

    /// Every invocation is allowable, completed by any alphabet label with
    /// that invocation.
    static CompletableExtension standard(const SequentialObject& spec)
    {
        return {spec, [](const Invocation&) { return true; },
                [spec](const Invocation& inv) { return spec.completions(inv); }};
    }
};

struct CompletionVerdict {
    bool linearizable = false;
    /// The completed events, in structure order, on success.
    std::vector<Event> completed;
    LinWitness witness;
    std::uint64_t substitutions_tried = 0;
};

/// Searches completions of the incomplete events (alphabet order, first
/// success wins) for a causally linearizable structure.
inline CompletionVerdict complete_and_check(const ExecutionStructure& s,
                                            const CompletableExtension& ext,
                                            const CheckOptions& opt = {})
{
    std::vector<std::size_t> pending;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (!s.event(i).complete()) {
            pending.push_back(i);
        }
    }
    std::vector<std::vector<Label>> choices;
    for (auto i : pending) {
        for (std::size_t j = 0; j < s.size(); ++j) {
            if (s.hard().contains(i, j)) {
                throw MalformedInput("hard edge out of incomplete event '" + s.tag(i) + "'");
            }
        }
        const auto& inv = s.event(i).invocation;
        if (!ext.allowable(inv)) {
            throw PreconditionFailed("invocation " + to_string(inv) + " may not stay incomplete");
        }
        choices.push_back(ext.completions(inv));
        for (const auto& l : choices.back()) {
            if (l.invocation != inv || !ext.base.in_alphabet(l)) {
                throw InvariantViolation("completion " + to_string(l) + " does not match " +
                                         to_string(inv));
            }
        }
    }
    if (opt.require_valid && !validate_axioms(s).pass()) {
        throw PreconditionFailed("not an execution structure (run validate_axioms)");
    }
    CheckOptions inner = opt;
    inner.require_valid = false;

    CompletionVerdict v;
    std::vector<std::size_t> pick(pending.size(), 0);
    for (const auto& c : choices) {
        if (c.empty()) {
            return v;
        }
    }
    for (;;) {
        auto events = s.events();
        for (std::size_t k = 0; k < pending.size(); ++k) {
            events[pending[k]].response = choices[k][pick[k]].response;
        }
        ++v.substitutions_tried;
        auto candidate = s.with_events(events);
        auto w = causally_linearizable(candidate, ext.base, inner);
        if (w.linearizable) {
            v.linearizable = true;
            v.completed = std::move(events);
            v.witness = std::move(w);
            return v;
        }
        std::size_t k = pending.size();
        while (k > 0) {
            --k;
            if (++pick[k] < choices[k].size()) {
                break;
            }
            pick[k] = 0;
            if (k == 0) {
                return v;
            }
        }
        if (pending.empty()) {
            return v;
        }
    }
}

// ---------------------------------------------------------------------------
// Harnesses

struct CompositionalityReport {
    bool whole = false;
    std::map<ObjectId, bool> per_object;

    bool all_projections() const
    {
        return std::all_of(per_object.begin(), per_object.end(),
                           [](const auto& kv) { return kv.second; });
    }

    bool holds() const { return whole == all_projections(); }
};

/// Whole structure against the composed family versus each projection
/// against its own object.
inline CompositionalityReport check_compositionality(const ExecutionStructure& s,
                                                     const SequentialObject& family,
                                                     const CheckOptions& opt = {})
{
    CompositionalityReport r;
    r.whole = causally_linearizable(s, family, opt).linearizable;
    for (const auto& x : s.objects()) {
        std::vector<SequentialObject> one{SequentialObject(family.part(x))};
        r.per_object[x] = causally_linearizable(restrict(s, x), compose(one), opt).linearizable;
    }
    return r;
}

struct RefinementReport {
    LinWitness a;
    LinWitness b;
    /// a's witness is also a witness for b.
    bool witness_transfers = false;

    bool preserved() const { return !a.linearizable || (b.linearizable && witness_transfers); }
};

inline RefinementReport check_refinement_preservation(const ExecutionStructure& a,
                                                      const ExecutionStructure& b,
                                                      const SequentialObject& spec,
                                                      const CheckOptions& opt = {})
{
    if (!refines(b, a)) {
        throw PreconditionFailed("second structure does not refine the first");
    }
    RefinementReport r;
    r.a = causally_linearizable(a, spec, opt);
    r.b = causally_linearizable(b, spec, opt);
    r.witness_transfers = r.a.linearizable && witness_valid(b, spec, r.a.sequence);
    return r;
}

}  // namespace causalin
