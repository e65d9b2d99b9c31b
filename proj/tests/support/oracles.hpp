#pragma once

// Reference implementations used only by the tests. They are written
// directly from the definitions, favour obviousness over speed, and share
// no search code with the library.

#include <algorithm>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "causalin/causalin.hpp"

namespace oracle {

using namespace causalin;
using Rng = std::mt19937_64;

inline int uniform(Rng& rng, int lo, int hi)
{
    return std::uniform_int_distribution<int>(lo, hi)(rng);
}

inline bool coin(Rng& rng, double p)
{
    return std::bernoulli_distribution(p)(rng);
}

// ---------------------------------------------------------------------------
// Sequential objects, by hand

enum class Kind { stack_blocking, stack_empty, reg };

inline Kind kind_of(const std::string& spec)
{
    if (spec == "stack-blocking") {
        return Kind::stack_blocking;
    }
    if (spec == "stack-empty") {
        return Kind::stack_empty;
    }
    return Kind::reg;
}

/// Replays labels against one vector per object. Registers start at 0.
inline bool legal(Kind kind, const std::vector<Label>& k)
{
    std::map<ObjectId, std::vector<Value>> st;
    for (const auto& l : k) {
        auto& s = st[l.object()];
        const auto& m = l.invocation.method;
        if (kind == Kind::reg) {
            Value cur = s.empty() ? 0 : s.back();
            if (m == "write") {
                if (l.response.kind != Response::Kind::bottom) {
                    return false;
                }
                s = {*l.invocation.argument};
            } else if (l.response.kind != Response::Kind::value || l.response.value != cur) {
                return false;
            }
            continue;
        }
        if (m == "push") {
            if (l.response.kind != Response::Kind::bottom) {
                return false;
            }
            s.push_back(*l.invocation.argument);
        } else if (s.empty()) {
            if (kind != Kind::stack_empty || l.response.kind != Response::Kind::empty) {
                return false;
            }
        } else {
            if (l.response.kind != Response::Kind::value || l.response.value != s.back()) {
                return false;
            }
            s.pop_back();
        }
    }
    return true;
}

inline bool conflict(Kind kind, const Label& a, const Label& b)
{
    if (a.object() != b.object()) {
        return false;
    }
    if (kind != Kind::reg) {
        return a != b;
    }
    bool wa = a.invocation.method == "write";
    bool wb = b.invocation.method == "write";
    if (!wa && !wb) {
        return false;
    }
    if (wa && wb) {
        return a.invocation.argument != b.invocation.argument;
    }
    return true;
}

// ---------------------------------------------------------------------------
// Execution structures

struct Pairs {
    std::size_t n = 0;
    std::vector<std::vector<bool>> m;

    explicit Pairs(std::size_t n = 0) : n(n), m(n, std::vector<bool>(n, false)) {}
    bool operator()(std::size_t a, std::size_t b) const { return m[a][b]; }
    void set(std::size_t a, std::size_t b) { m[a][b] = true; }
};

inline Pairs to_pairs(const Relation& r)
{
    Pairs p(r.size());
    for (auto [a, b] : r.pairs()) {
        p.set(a, b);
    }
    return p;
}

inline Relation to_relation(const Pairs& p)
{
    Relation r(p.n);
    for (std::size_t a = 0; a < p.n; ++a) {
        for (std::size_t b = 0; b < p.n; ++b) {
            if (p(a, b)) {
                r.insert(a, b);
            }
        }
    }
    return r;
}

/// Axioms checked literally over all tuples.
inline bool axioms_hold(const Pairs& h, const Pairs& s)
{
    const auto n = h.n;
    for (std::size_t a = 0; a < n; ++a) {
        if (h(a, a)) {
            return false;
        }
        for (std::size_t b = 0; b < n; ++b) {
            if (h(a, b) && (!s(a, b) || s(b, a))) {
                return false;
            }
            for (std::size_t c = 0; c < n; ++c) {
                if (h(a, b) && h(b, c) && !h(a, c)) {
                    return false;
                }
                if (((h(a, b) && s(b, c)) || (s(a, b) && h(b, c))) && !s(a, c)) {
                    return false;
                }
                for (std::size_t d = 0; d < n; ++d) {
                    if (h(a, b) && s(b, c) && h(c, d) && !h(a, d)) {
                        return false;
                    }
                }
            }
        }
    }
    return true;
}

/// Naive closure: apply every rule to every tuple until nothing changes.
/// Empty when the fixpoint breaks A1 or A2.
inline std::optional<std::pair<Pairs, Pairs>> close(Pairs h, Pairs s)
{
    const auto n = h.n;
    for (bool changed = true; changed;) {
        changed = false;
        auto add = [&](Pairs& r, std::size_t a, std::size_t b) {
            if (!r(a, b)) {
                r.set(a, b);
                changed = true;
            }
        };
        for (std::size_t a = 0; a < n; ++a) {
            for (std::size_t b = 0; b < n; ++b) {
                if (h(a, b)) {
                    add(s, a, b);
                }
                for (std::size_t c = 0; c < n; ++c) {
                    if (h(a, b) && h(b, c)) {
                        add(h, a, c);
                    }
                    if ((h(a, b) && s(b, c)) || (s(a, b) && h(b, c))) {
                        add(s, a, c);
                    }
                    for (std::size_t d = 0; d < n; ++d) {
                        if (h(a, b) && s(b, c) && h(c, d)) {
                            add(h, a, d);
                        }
                    }
                }
            }
        }
    }
    for (std::size_t a = 0; a < n; ++a) {
        if (h(a, a)) {
            return std::nullopt;
        }
        for (std::size_t b = 0; b < n; ++b) {
            if (h(a, b) && s(b, a)) {
                return std::nullopt;
            }
        }
    }
    return std::pair{std::move(h), std::move(s)};
}

/// Tries every permutation. use_soft=false gives the real-time variant.
inline std::optional<std::vector<std::size_t>> linearize(const std::vector<Label>& labels,
                                                         const Pairs& h, const Pairs& s,
                                                         Kind kind, bool use_soft = true)
{
    std::vector<std::size_t> k(labels.size());
    std::iota(k.begin(), k.end(), 0);
    do {
        std::vector<Label> seq;
        for (auto i : k) {
            seq.push_back(labels[i]);
        }
        if (!legal(kind, seq)) {
            continue;
        }
        bool ok = true;
        for (std::size_t i = 0; i < k.size() && ok; ++i) {
            for (std::size_t j = i + 1; j < k.size() && ok; ++j) {
                if (h(k[j], k[i])) {
                    ok = false;
                }
                if (use_soft && conflict(kind, labels[k[i]], labels[k[j]]) && !s(k[i], k[j])) {
                    ok = false;
                }
            }
        }
        if (ok) {
            return k;
        }
    } while (std::next_permutation(k.begin(), k.end()));
    return std::nullopt;
}

inline std::vector<Label> labels_of(const ExecutionStructure& s)
{
    std::vector<Label> out;
    for (const auto& e : s.events()) {
        out.push_back(e.label());
    }
    return out;
}

inline bool causally_linearizable(const ExecutionStructure& s, Kind kind)
{
    return linearize(labels_of(s), to_pairs(s.hard()), to_pairs(s.soft()), kind).has_value();
}

// ---------------------------------------------------------------------------
// Random structures

inline std::vector<Value> values{1, 2};

/// A random label sequence that is legal for `kind` over the given objects.
inline std::vector<Label> legal_run(Rng& rng, Kind kind, const std::vector<ObjectId>& objects, int n)
{
    std::map<ObjectId, std::vector<Value>> st;
    std::vector<Label> k;
    while (static_cast<int>(k.size()) < n) {
        const auto& x = objects[uniform(rng, 0, static_cast<int>(objects.size()) - 1)];
        auto& s = st[x];
        Value v = values[uniform(rng, 0, static_cast<int>(values.size()) - 1)];
        if (kind == Kind::reg) {
            if (coin(rng, 0.5)) {
                k.push_back({{x, "write", v}, Response::bottom()});
                s = {v};
            } else {
                k.push_back({{x, "read", std::nullopt}, Response::of(s.empty() ? 0 : s.back())});
            }
            continue;
        }
        if (coin(rng, 0.5) || (s.empty() && kind == Kind::stack_blocking)) {
            k.push_back({{x, "push", v}, Response::bottom()});
            s.push_back(v);
        } else if (s.empty()) {
            k.push_back({{x, "pop", std::nullopt}, Response::empty()});
        } else {
            k.push_back({{x, "pop", std::nullopt}, Response::of(s.back())});
            s.pop_back();
        }
    }
    return k;
}

inline Label random_label(Rng& rng, Kind kind, const std::vector<ObjectId>& objects)
{
    const auto& x = objects[uniform(rng, 0, static_cast<int>(objects.size()) - 1)];
    Value v = values[uniform(rng, 0, static_cast<int>(values.size()) - 1)];
    if (kind == Kind::reg) {
        if (coin(rng, 0.5)) {
            return {{x, "write", v}, Response::bottom()};
        }
        return {{x, "read", std::nullopt}, Response::of(uniform(rng, 0, 2))};
    }
    if (coin(rng, 0.5)) {
        return {{x, "push", v}, Response::bottom()};
    }
    if (kind == Kind::stack_empty && coin(rng, 0.25)) {
        return {{x, "pop", std::nullopt}, Response::empty()};
    }
    return {{x, "pop", std::nullopt}, Response::of(v)};
}

struct StructureParams {
    Kind kind = Kind::stack_blocking;
    int max_objects = 2;
    int max_events = 6;
    /// Probability that the labels come from a legal run (else random).
    double from_run = 0.7;
};

/// A random valid execution structure: labels from a legal run (possibly
/// perturbed) or random, hard from a random sub-order, soft adding
/// conflict edges in run order and a few backwards ones, then closed.
inline ExecutionStructure random_structure(Rng& rng, const StructureParams& p)
{
    static const std::vector<ObjectId> names{"X", "Y"};
    for (;;) {
        std::vector<ObjectId> objects(names.begin(), names.begin() + uniform(rng, 1, p.max_objects));
        const int n = uniform(rng, 1, p.max_events);
        std::vector<Label> labels;
        if (coin(rng, p.from_run)) {
            labels = legal_run(rng, p.kind, objects, n);
            if (coin(rng, 0.15)) {
                labels[uniform(rng, 0, n - 1)] = random_label(rng, p.kind, objects);
            }
        } else {
            for (int i = 0; i < n; ++i) {
                labels.push_back(random_label(rng, p.kind, objects));
            }
        }
        // Events are related along a random order `pos`.
        std::vector<std::size_t> pos(n);
        std::iota(pos.begin(), pos.end(), 0);
        if (coin(rng, 0.3)) {
            std::shuffle(pos.begin(), pos.end(), rng);
        }
        Pairs h(n);
        Pairs s(n);
        std::vector<int> proc(n);
        for (int i = 0; i < n; ++i) {
            proc[i] = uniform(rng, 0, 2);
        }
        const double ph = std::uniform_real_distribution<double>(0.0, 0.5)(rng);
        for (int i = 0; i < n; ++i) {
            for (int j = i + 1; j < n; ++j) {
                auto a = pos[i];
                auto b = pos[j];
                if (proc[a] == proc[b] || coin(rng, ph)) {
                    h.set(a, b);
                }
                if (conflict(p.kind, labels[a], labels[b]) && coin(rng, 0.75)) {
                    s.set(a, b);
                }
                if (coin(rng, 0.1)) {
                    s.set(b, a);
                }
            }
        }
        auto c = close(h, s);
        if (!c) {
            continue;
        }
        std::vector<Event> events;
        for (int i = 0; i < n; ++i) {
            events.push_back(Event{"e" + std::to_string(i), "P" + std::to_string(proc[i]),
                                   labels[i].invocation, labels[i].response});
        }
        return ExecutionStructure(std::move(events), to_relation(c->first), to_relation(c->second),
                                  {objects.begin(), objects.end()});
    }
}

/// A refinement of `a`: fewer precedence edges, more communication, closed
/// and still below `a`. Empty if the attempt does not produce one.
inline std::optional<ExecutionStructure> random_refinement(Rng& rng, const ExecutionStructure& a)
{
    const auto n = a.size();
    auto h = to_pairs(a.hard());
    auto s = to_pairs(a.soft());
    Pairs h2(n);
    Pairs s2 = s;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (h(i, j) && coin(rng, 0.6)) {
                h2.set(i, j);
            }
            if (i != j && !h(j, i) && coin(rng, 0.2)) {
                s2.set(i, j);
            }
        }
    }
    auto c = close(h2, s2);
    if (!c) {
        return std::nullopt;
    }
    ExecutionStructure b(a.events(), to_relation(c->first), to_relation(c->second), a.objects());
    if (!refines(b, a)) {
        return std::nullopt;
    }
    return b;
}

// ---------------------------------------------------------------------------
// Histories

/// A random complete, totally ordered history. Responses follow an
/// atomic run most of the time and are random otherwise.
inline History random_history(Rng& rng, Kind kind, int max_ops)
{
    static const std::vector<ObjectId> objects{"X", "Y"};
    const int n = uniform(rng, 1, max_ops);
    const int procs = uniform(rng, 1, 3);
    std::vector<HistoryAction> actions;
    std::map<ObjectId, std::vector<Value>> st;
    std::vector<std::optional<std::pair<int, Invocation>>> pending(procs);
    int started = 0;
    int finished = 0;
    const bool honest = coin(rng, 0.75);
    while (finished < n) {
        int p = uniform(rng, 0, procs - 1);
        if (!pending[p]) {
            if (started == n) {
                continue;
            }
            auto l = random_label(rng, kind, {objects.begin(), objects.begin() + 2});
            pending[p] = std::pair{started, l.invocation};
            actions.push_back(HistoryAction::invoke("i" + std::to_string(started), "P" + std::to_string(p),
                                                    l.invocation));
            ++started;
            continue;
        }
        auto [id, inv] = *pending[p];
        auto& s = st[inv.object];
        Response r = Response::bottom();
        if (inv.method == "write") {
            s = {*inv.argument};
        } else if (inv.method == "read") {
            r = Response::of(s.empty() ? 0 : s.back());
        } else if (inv.method == "push") {
            s.push_back(*inv.argument);
        } else if (!s.empty()) {
            r = Response::of(s.back());
            s.pop_back();
        } else {
            r = kind == Kind::stack_empty ? Response::empty() : Response::of(values[0]);
        }
        if (!honest && inv.method != "write" && inv.method != "push" && coin(rng, 0.5)) {
            r = Response::of(values[uniform(rng, 0, 1)]);
        }
        actions.push_back(HistoryAction::respond("r" + std::to_string(id), "P" + std::to_string(p),
                                                 inv.object, r));
        pending[p].reset();
        ++finished;
    }
    return History::from_sequence(std::move(actions));
}

/// Classical linearizability by definition: a legal permutation of the
/// operations that respects response-before-invocation.
inline bool classically_linearizable(const History& h, Kind kind)
{
    auto ops = h.matching_pairs();
    std::vector<Label> labels;
    for (const auto& op : ops) {
        labels.push_back({h.action(op.invocation).invocation, h.action(*op.response).response});
    }
    Pairs rt(ops.size());
    for (std::size_t a = 0; a < ops.size(); ++a) {
        for (std::size_t b = 0; b < ops.size(); ++b) {
            if (*ops[a].response < ops[b].invocation) {
                rt.set(a, b);
            }
        }
    }
    return linearize(labels, rt, rt, kind, false).has_value();
}

// ---------------------------------------------------------------------------
// Straight-line memory programs and a generate-and-filter enumerator

struct MemInstr {
    enum class Op { write, write_reg, read, cas };
    Op op;
    std::string loc;
    Annotation ann = Annotation::none;
    Value a = 0;  // written value, CAS expected
    Value b = 0;  // CAS desired
    std::string reg;
};

struct MemProgram {
    std::vector<std::pair<std::string, Value>> init;
    std::vector<std::vector<MemInstr>> threads;
};

inline std::string ann_suffix(Annotation a)
{
    return a == Annotation::none ? "" : std::string("[") + to_string(a) + "]";
}

inline std::string to_litmus(const MemProgram& p, const std::string& name)
{
    std::string out = "litmus " + name + "\ninit";
    for (const auto& [x, v] : p.init) {
        out += " " + x + "=" + std::to_string(v);
    }
    out += "\n";
    std::size_t rows = 0;
    for (std::size_t t = 0; t < p.threads.size(); ++t) {
        out += (t ? " | P" : "P") + std::to_string(t);
        rows = std::max(rows, p.threads[t].size());
    }
    out += "\n";
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t t = 0; t < p.threads.size(); ++t) {
            std::string cell;
            if (r < p.threads[t].size()) {
                const auto& i = p.threads[t][r];
                switch (i.op) {
                case MemInstr::Op::write:
                    cell = "W" + ann_suffix(i.ann) + " " + i.loc + " " + std::to_string(i.a);
                    break;
                case MemInstr::Op::write_reg:
                    cell = "W" + ann_suffix(i.ann) + " " + i.loc + " " + i.reg;
                    break;
                case MemInstr::Op::read:
                    cell = "R" + ann_suffix(i.ann) + " " + i.loc + " " + i.reg;
                    break;
                case MemInstr::Op::cas:
                    cell = "CAS" + ann_suffix(i.ann) + " " + i.loc + " " + std::to_string(i.a) + " " +
                           std::to_string(i.b);
                    break;
                }
            }
            out += (t ? " | " : "") + cell;
        }
        out += "\n";
    }
    return out;
}

inline MemProgram random_program(Rng& rng, std::size_t max_memory_events)
{
    static const std::vector<std::string> locs{"x", "y"};
    static const std::vector<Annotation> anns{Annotation::none, Annotation::release,
                                              Annotation::acquire, Annotation::release_acquire};
    MemProgram p;
    const int nloc = uniform(rng, 1, 2);
    for (int i = 0; i < nloc; ++i) {
        p.init.emplace_back(locs[i], 0);
    }
    const int nthreads = uniform(rng, 2, 3);
    const int budget = uniform(rng, nthreads, static_cast<int>(max_memory_events) - nloc);
    p.threads.resize(nthreads);
    for (int k = 0; k < budget; ++k) {
        auto& t = p.threads[k < nthreads ? k : uniform(rng, 0, nthreads - 1)];
        MemInstr i;
        i.loc = locs[uniform(rng, 0, nloc - 1)];
        std::vector<std::string> regs;
        for (const auto& j : t) {
            if (j.op == MemInstr::Op::read) {
                regs.push_back(j.reg);
            }
        }
        switch (uniform(rng, 0, 3)) {
        case 0:
            i.op = MemInstr::Op::write;
            i.a = uniform(rng, 1, 2);
            i.ann = coin(rng, 0.5) ? Annotation::release : Annotation::none;
            break;
        case 1:
            if (!regs.empty()) {
                i.op = MemInstr::Op::write_reg;
                i.reg = regs[uniform(rng, 0, static_cast<int>(regs.size()) - 1)];
                i.ann = coin(rng, 0.5) ? Annotation::release : Annotation::none;
                break;
            }
            [[fallthrough]];
        case 2:
            i.op = MemInstr::Op::read;
            i.reg = "r" + std::to_string(t.size());
            i.ann = coin(rng, 0.5) ? Annotation::acquire : Annotation::none;
            break;
        default:
            i.op = MemInstr::Op::cas;
            i.a = uniform(rng, 0, 2);
            i.b = uniform(rng, 1, 2);
            i.ann = anns[uniform(rng, 0, 3)];
            break;
        }
        t.push_back(i);
    }
    return p;
}

inline Annotation acquire_half(Annotation a)
{
    return a == Annotation::acquire || a == Annotation::release_acquire ? Annotation::acquire
                                                                        : Annotation::none;
}

/// All outcome paths of one thread given per-location read candidates.
inline std::vector<std::vector<MemoryEvent>> thread_paths(const std::vector<MemInstr>& code,
                                                          const std::string& name,
                                                          const std::map<std::string, std::set<Value>>& cand)
{
    std::vector<std::vector<MemoryEvent>> out;
    std::function<void(std::size_t, std::map<std::string, Value>, std::vector<MemoryEvent>)> go =
        [&](std::size_t pc, std::map<std::string, Value> regs, std::vector<MemoryEvent> evs) {
            if (pc == code.size()) {
                out.push_back(std::move(evs));
                return;
            }
            const auto& i = code[pc];
            MemoryEvent e;
            e.tag = name + ":" + std::to_string(pc);
            e.process = name;
            e.location = parse_location(i.loc);
            e.annotation = i.ann;
            if (i.op == MemInstr::Op::write || i.op == MemInstr::Op::write_reg) {
                e.kind = EventKind::write;
                e.wval = Datum::integer(i.op == MemInstr::Op::write ? i.a : regs.at(i.reg));
                evs.push_back(e);
                go(pc + 1, regs, evs);
                return;
            }
            auto it = cand.find(i.loc);
            if (it == cand.end()) {
                return;
            }
            for (auto v : it->second) {
                auto e2 = e;
                auto r2 = regs;
                e2.rval = Datum::integer(v);
                if (i.op == MemInstr::Op::read) {
                    e2.kind = EventKind::read;
                    r2[i.reg] = v;
                } else if (v == i.a) {
                    e2.kind = EventKind::update;
                    e2.wval = Datum::integer(i.b);
                } else {
                    e2.kind = EventKind::read;
                    e2.annotation = acquire_half(i.ann);
                }
                auto evs2 = evs;
                evs2.push_back(e2);
                go(pc + 1, r2, evs2);
            }
        };
    go(0, {}, {});
    return out;
}

/// Consistency straight from the definitions: sw = rf ∩ (rel × acq),
/// hb = (sb ∪ sw)+, fr = rf⁻¹;mo, hb acyclic and hb;(mo ∪ rf ∪ fr)
/// irreflexive.
inline bool consistent(const std::vector<MemoryEvent>& ev, const Pairs& sb, const Pairs& rf,
                       const Pairs& mo)
{
    const auto n = ev.size();
    Pairs hb(n);
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = 0; b < n; ++b) {
            if (sb(a, b) || (rf(a, b) && ev[a].releasing() && ev[b].acquiring())) {
                hb.set(a, b);
            }
        }
    }
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t a = 0; a < n; ++a) {
            for (std::size_t b = 0; b < n; ++b) {
                if (hb(a, k) && hb(k, b)) {
                    hb.set(a, b);
                }
            }
        }
    }
    Pairs fr(n);
    for (std::size_t w = 0; w < n; ++w) {
        for (std::size_t r = 0; r < n; ++r) {
            for (std::size_t w2 = 0; w2 < n; ++w2) {
                if (rf(w, r) && mo(w, w2) && r != w2) {
                    fr.set(r, w2);
                }
            }
        }
    }
    for (std::size_t a = 0; a < n; ++a) {
        if (hb(a, a)) {
            return false;
        }
        for (std::size_t b = 0; b < n; ++b) {
            if (hb(a, b) && (mo(b, a) || rf(b, a) || fr(b, a))) {
                return false;
            }
        }
    }
    return true;
}

/// Least fixpoint of read candidates, then every combination of thread
/// paths, rf choice and per-location mo permutation, filtered by
/// consistency. Returns fingerprints.
inline std::set<std::string> enumerate(const MemProgram& p)
{
    std::map<std::string, std::set<Value>> cand;
    for (const auto& [x, v] : p.init) {
        cand[x].insert(v);
    }
    std::vector<std::vector<std::vector<MemoryEvent>>> paths;
    for (;;) {
        paths.clear();
        auto next = cand;
        for (std::size_t t = 0; t < p.threads.size(); ++t) {
            paths.push_back(thread_paths(p.threads[t], "P" + std::to_string(t), cand));
            for (const auto& path : paths.back()) {
                for (const auto& e : path) {
                    if (e.is_mod()) {
                        next[to_string(e.location)].insert(e.wval.value);
                    }
                }
            }
        }
        if (next == cand) {
            break;
        }
        cand = std::move(next);
    }

    std::set<std::string> out;
    std::vector<std::size_t> pick(paths.size(), 0);
    std::function<void(std::size_t)> choose_paths = [&](std::size_t t) {
        if (t < paths.size()) {
            for (pick[t] = 0; pick[t] < paths[t].size(); ++pick[t]) {
                choose_paths(t + 1);
            }
            return;
        }
        std::vector<MemoryEvent> ev;
        for (const auto& [x, v] : p.init) {
            MemoryEvent e;
            e.tag = "init:" + x;
            e.process = init_process();
            e.kind = EventKind::write;
            e.location = parse_location(x);
            e.wval = Datum::integer(v);
            ev.push_back(e);
        }
        const auto n_init = ev.size();
        std::vector<std::pair<std::size_t, std::size_t>> spans;
        for (std::size_t i = 0; i < paths.size(); ++i) {
            const auto& path = paths[i][pick[i]];
            spans.emplace_back(ev.size(), ev.size() + path.size());
            ev.insert(ev.end(), path.begin(), path.end());
        }
        const auto n = ev.size();
        Pairs sb(n);
        for (std::size_t i = 0; i < n_init; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                sb.set(i, j);
            }
        }
        for (auto [lo, hi] : spans) {
            for (auto i = lo; i < hi; ++i) {
                for (auto j = i + 1; j < hi; ++j) {
                    sb.set(i, j);
                }
            }
        }
        std::vector<std::size_t> queries;
        for (std::size_t q = 0; q < n; ++q) {
            if (ev[q].is_query()) {
                queries.push_back(q);
            }
        }
        std::map<Location, std::vector<std::size_t>> mods;
        for (std::size_t w = 0; w < n; ++w) {
            if (ev[w].is_mod()) {
                mods[ev[w].location].push_back(w);
            }
        }
        Pairs rf(n);
        std::function<void(std::size_t)> choose_rf = [&](std::size_t qi) {
            if (qi < queries.size()) {
                auto q = queries[qi];
                for (auto w : mods[ev[q].location]) {
                    if (w != q && ev[w].wval == ev[q].rval) {
                        rf.m[w][q] = true;
                        choose_rf(qi + 1);
                        rf.m[w][q] = false;
                    }
                }
                return;
            }
            std::vector<std::vector<std::size_t>> orders;
            for (auto& [loc, ws] : mods) {
                auto w = ws;
                std::sort(w.begin(), w.end());
                orders.push_back(w);
            }
            std::function<void(std::size_t)> choose_mo = [&](std::size_t li) {
                if (li < orders.size()) {
                    auto& o = orders[li];
                    std::sort(o.begin(), o.end());
                    do {
                        choose_mo(li + 1);
                    } while (std::next_permutation(o.begin(), o.end()));
                    return;
                }
                Pairs mo(n);
                for (const auto& o : orders) {
                    for (std::size_t i = 0; i < o.size(); ++i) {
                        for (std::size_t j = i + 1; j < o.size(); ++j) {
                            mo.set(o[i], o[j]);
                        }
                    }
                }
                if (consistent(ev, sb, rf, mo)) {
                    out.insert(fingerprint(C11Execution(ev, to_relation(sb), to_relation(rf),
                                                        to_relation(mo))));
                }
            };
            choose_mo(0);
        };
        choose_rf(0);
    };
    choose_paths(0);
    return out;
}

}  // namespace oracle
