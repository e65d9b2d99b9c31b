#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "causalin/c11.hpp"
#include "causalin/errors.hpp"
#include "causalin/litmus.hpp"

namespace causalin {

struct Bounds {
    /// Backward jumps allowed per loop label on one thread path.
    std::size_t retries = 2;
    /// Distinct non-zero integer values a program may mention.
    std::size_t values = 3;
    /// Events per execution.
    std::size_t max_events = 64;

    friend bool operator==(const Bounds&, const Bounds&) = default;
};

/// Parses "retries=2,values=3,events=64" (any subset, any order).
inline Bounds parse_bounds(const std::string& text)
{
    Bounds b;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        auto eq = item.find('=');
        if (eq == std::string::npos) {
            throw MalformedInput("bad bound '" + item + "' (expected key=value)");
        }
        auto key = std::string(detail::trim(item.substr(0, eq)));
        auto v = detail::parse_value(item.substr(eq + 1));
        if (!v || *v <= 0) {
            throw MalformedInput("bound '" + key + "' needs a positive integer");
        }
        auto n = static_cast<std::size_t>(*v);
        if (key == "retries") {
            b.retries = n;
        } else if (key == "values") {
            b.values = n;
        } else if (key == "events" || key == "max_events") {
            b.max_events = n;
        } else {
            throw MalformedInput("unknown bound '" + key + "' (valid: retries, values, events)");
        }
    }
    return b;
}

inline std::string to_string(const Bounds& b)
{
    return "retries=" + std::to_string(b.retries) + ",values=" + std::to_string(b.values) +
           ",events=" + std::to_string(b.max_events);
}

/// Canonical text of an execution: events and relation pairs, sorted by
/// tag. Equal fingerprints mean equal executions.
inline std::string fingerprint(const C11Execution& d)
{
    std::vector<std::string> events;
    for (const auto& e : d.events()) {
        events.push_back(describe(e) + "@" + e.process + "/" + e.object);
    }
    std::sort(events.begin(), events.end());
    std::string out;
    for (const auto& e : events) {
        out += e + ";";
    }
    for (const auto* r : {&d.sb(), &d.rf(), &d.mo()}) {
        auto pairs = d.tag_pairs(*r);
        std::sort(pairs.begin(), pairs.end());
        out += "|";
        for (const auto& [a, b] : pairs) {
            out += a + ">" + b + ";";
        }
    }
    return out;
}

/// Per-location candidate values for reads.
using CandidateMap = std::map<Location, std::set<Datum>>;

namespace detail {

inline Annotation acquire_part(Annotation a)
{
    return a == Annotation::acquire || a == Annotation::release_acquire ? Annotation::acquire
                                                                        : Annotation::none;
}

/// Depth-first exploration of one thread's control flow. Reads (and CAS
/// reads) guess a value from the candidate set of their location.
class PathExplorer {
  public:
    PathExplorer(const Thread& thread, const Bounds& bounds, const CandidateMap& cand)
        : thread_(thread), bounds_(bounds), cand_(cand)
    {}

    std::vector<std::vector<MemoryEvent>> run()
    {
        State s;
        go(s);
        return std::move(paths_);
    }

    /// Values written on any explored prefix, completed or not.
    const CandidateMap& written() const { return written_; }

  private:
    struct State {
        std::size_t pc = 0;
        std::map<std::string, Datum> regs;
        std::optional<bool> cas_ok;
        std::map<std::size_t, std::size_t> back_jumps;
        std::map<std::size_t, std::size_t> visits;
        std::optional<ObjectId> span;
        std::size_t allocs = 0;
        std::vector<MemoryEvent> events;
    };

    Datum eval(const State& s, const Operand& o) const
    {
        switch (o.kind) {
        case Operand::Kind::integer:
            return Datum::integer(o.value);
        case Operand::Kind::null:
            return Datum::null();
        case Operand::Kind::address:
            return Datum::pointer(o.name);
        case Operand::Kind::reg:
            break;
        }
        auto it = s.regs.find(o.name);
        if (it == s.regs.end()) {
            throw MalformedInput("register " + o.name + " read before assignment on thread " +
                                 thread_.name);
        }
        return it->second;
    }

    /// The accessed location, or nothing if a dereferenced register does
    /// not hold a pointer (the path is infeasible).
    std::optional<Location> resolve(const State& s, const LocExpr& l) const
    {
        if (l.reg.empty()) {
            return l.path;
        }
        auto p = eval(s, Operand::reg(l.reg));
        if (p.kind != Datum::Kind::pointer) {
            return std::nullopt;
        }
        return Location{p.pointee, l.path.fields};
    }

    MemoryEvent make(State& s, EventKind kind) const
    {
        MemoryEvent e;
        auto visit = s.visits[s.pc]++;
        e.tag = thread_.name + ":" + std::to_string(s.pc);
        if (visit > 0) {
            e.tag += "#" + std::to_string(visit);
        }
        e.process = thread_.name;
        e.kind = kind;
        e.object = s.span.value_or("");
        return e;
    }

    void emit(State& s, MemoryEvent e)
    {
        if (e.is_mod()) {
            written_[e.location].insert(e.wval);
        }
        s.events.push_back(std::move(e));
        if (s.events.size() > bounds_.max_events) {
            throw BoundExceeded("events on a path of thread " + thread_.name, s.events.size(),
                                bounds_.max_events);
        }
    }

    const std::set<Datum>& candidates(const Location& l) const
    {
        static const std::set<Datum> none;
        auto it = cand_.find(l);
        return it == cand_.end() ? none : it->second;
    }

    void jump(State s, std::size_t target)
    {
        if (target <= s.pc) {
            if (++s.back_jumps[target] > bounds_.retries) {
                return;
            }
        }
        s.pc = target;
        go(std::move(s));
    }

    void go(State s)
    {
        while (s.pc < thread_.code.size()) {
            const auto& ins = thread_.code[s.pc];
            auto target = [&]() { return thread_.labels.at(ins.target); };
            switch (ins.op) {
            case Instr::Op::nop:
                break;
            case Instr::Op::write: {
                auto loc = resolve(s, ins.loc);
                if (!loc) {
                    return;
                }
                auto e = make(s, EventKind::write);
                e.location = *loc;
                e.wval = eval(s, ins.a);
                e.annotation = ins.ann;
                emit(s, std::move(e));
                break;
            }
            case Instr::Op::read: {
                auto loc = resolve(s, ins.loc);
                if (!loc) {
                    return;
                }
                for (const auto& v : candidates(*loc)) {
                    State t = s;
                    auto e = make(t, EventKind::read);
                    e.location = *loc;
                    e.rval = v;
                    e.annotation = ins.ann;
                    emit(t, std::move(e));
                    t.regs[ins.reg] = v;
                    ++t.pc;
                    go(std::move(t));
                }
                return;
            }
            case Instr::Op::cas: {
                auto loc = resolve(s, ins.loc);
                if (!loc) {
                    return;
                }
                auto expected = eval(s, ins.a);
                auto desired = eval(s, ins.b);
                for (const auto& v : candidates(*loc)) {
                    State t = s;
                    bool ok = v == expected;
                    auto e = make(t, ok ? EventKind::update : EventKind::read);
                    e.location = *loc;
                    e.rval = v;
                    if (ok) {
                        e.wval = desired;
                        e.annotation = ins.ann;
                    } else {
                        e.annotation = acquire_part(ins.ann);
                    }
                    emit(t, std::move(e));
                    t.cas_ok = ok;
                    ++t.pc;
                    go(std::move(t));
                }
                return;
            }
            case Instr::Op::alloc: {
                auto e = make(s, EventKind::allocation);
                auto name = thread_.name + "_n" + std::to_string(s.allocs++);
                e.location = Location{name, {}};
                emit(s, std::move(e));
                s.regs[ins.reg] = Datum::pointer(name);
                break;
            }
            case Instr::Op::invoke: {
                auto e = make(s, EventKind::invocation);
                e.object = ins.object;
                e.invocation = Invocation{ins.object, ins.method, std::nullopt};
                if (ins.has_arg) {
                    auto v = eval(s, ins.a);
                    if (v.kind != Datum::Kind::integer) {
                        return;
                    }
                    e.invocation.argument = v.value;
                }
                emit(s, std::move(e));
                s.span = ins.object;
                break;
            }
            case Instr::Op::respond: {
                auto e = make(s, EventKind::response);
                e.object = ins.object;
                e.response.kind = ins.response;
                if (ins.response == Response::Kind::value) {
                    auto v = eval(s, ins.a);
                    if (v.kind != Datum::Kind::integer) {
                        return;
                    }
                    e.response.value = v.value;
                }
                emit(s, std::move(e));
                s.span.reset();
                break;
            }
            case Instr::Op::jump:
                jump(std::move(s), target());
                return;
            case Instr::Op::beq:
            case Instr::Op::bne: {
                bool eq = eval(s, ins.a) == eval(s, ins.b);
                if (eq == (ins.op == Instr::Op::beq)) {
                    jump(std::move(s), target());
                    return;
                }
                break;
            }
            case Instr::Op::bfail:
            case Instr::Op::bok: {
                if (!s.cas_ok) {
                    throw MalformedInput("branch on CAS outcome before any CAS on thread " +
                                         thread_.name);
                }
                if (*s.cas_ok == (ins.op == Instr::Op::bok)) {
                    jump(std::move(s), target());
                    return;
                }
                break;
            }
            }
            ++s.pc;
        }
        paths_.push_back(std::move(s.events));
    }

    const Thread& thread_;
    const Bounds& bounds_;
    const CandidateMap& cand_;
    std::vector<std::vector<MemoryEvent>> paths_;
    CandidateMap written_;
};

inline void check_value_bound(const LitmusProgram& p, const Bounds& b)
{
    std::set<Value> values;
    auto note = [&](const Operand& o) {
        if (o.kind == Operand::Kind::integer && o.value != 0) {
            values.insert(o.value);
        }
    };
    for (const auto& [_, d] : p.init) {
        if (d.kind == Datum::Kind::integer && d.value != 0) {
            values.insert(d.value);
        }
    }
    for (const auto& t : p.threads) {
        for (const auto& i : t.code) {
            note(i.a);
            note(i.b);
        }
    }
    if (values.size() > b.values) {
        throw BoundExceeded("distinct values in program", values.size(), b.values);
    }
}

/// Drops paths with a read that no init write, no surviving path of another
/// thread and no earlier event of the same path can source. Repeated until
/// stable, since dropping a path can orphan reads elsewhere.
inline void prune_unsourced(const LitmusProgram& p, std::vector<std::vector<std::vector<MemoryEvent>>>& all)
{
    using Key = std::pair<Location, Datum>;
    std::set<Key> init;
    for (const auto& [l, v] : p.init) {
        init.emplace(l, v);
    }
    for (bool changed = true; changed;) {
        changed = false;
        std::vector<std::set<Key>> written(all.size());
        for (std::size_t t = 0; t < all.size(); ++t) {
            for (const auto& path : all[t]) {
                for (const auto& e : path) {
                    if (e.is_mod()) {
                        written[t].emplace(e.location, e.wval);
                    }
                }
            }
        }
        for (std::size_t t = 0; t < all.size(); ++t) {
            auto sourced = [&](const std::vector<MemoryEvent>& path) {
                std::set<Key> own;
                for (const auto& e : path) {
                    if (e.is_query()) {
                        Key k{e.location, e.rval};
                        bool ok = init.contains(k) || own.contains(k);
                        for (std::size_t u = 0; u < all.size() && !ok; ++u) {
                            ok = u != t && written[u].contains(k);
                        }
                        if (!ok) {
                            return false;
                        }
                    }
                    if (e.is_mod()) {
                        own.emplace(e.location, e.wval);
                    }
                }
                return true;
            };
            auto keep = std::stable_partition(all[t].begin(), all[t].end(), sourced);
            if (keep != all[t].end()) {
                all[t].erase(keep, all[t].end());
                changed = true;
            }
        }
    }
}

/// Control-flow paths of every thread, with read values drawn from the
/// least candidate map closed under "a path prefix writes v to l".
inline std::vector<std::vector<std::vector<MemoryEvent>>> thread_paths(const LitmusProgram& p,
                                                                       const Bounds& b)
{
    CandidateMap base;
    for (const auto& [l, v] : p.init) {
        base[l].insert(v);
    }
    CandidateMap cand = base;
    for (;;) {
        std::vector<std::vector<std::vector<MemoryEvent>>> all;
        CandidateMap next = base;
        for (const auto& t : p.threads) {
            PathExplorer explorer(t, b, cand);
            all.push_back(explorer.run());
            for (const auto& [l, vs] : explorer.written()) {
                next[l].insert(vs.begin(), vs.end());
            }
        }
        if (next == cand) {
            prune_unsourced(p, all);
            return all;
        }
        cand = std::move(next);
    }
}

/// Linear extensions of `order` restricted to `items`, in lexicographic
/// order of item positions.
inline void linear_extensions(const std::vector<std::size_t>& items, const Relation& order,
                              const std::function<void(const std::vector<std::size_t>&)>& fn)
{
    std::vector<std::size_t> seq;
    std::vector<bool> used(items.size(), false);
    std::function<void()> go = [&]() {
        if (seq.size() == items.size()) {
            fn(seq);
            return;
        }
        for (std::size_t i = 0; i < items.size(); ++i) {
            if (used[i]) {
                continue;
            }
            bool ready = true;
            for (std::size_t j = 0; j < items.size() && ready; ++j) {
                ready = used[j] || j == i || !order.contains(items[j], items[i]);
            }
            if (!ready) {
                continue;
            }
            used[i] = true;
            seq.push_back(items[i]);
            go();
            seq.pop_back();
            used[i] = false;
        }
    };
    go();
}

}  // namespace detail

/// Calls fn on every valid and consistent execution of p within bounds.
/// Read values are drawn from grounded candidate sets (values some write
/// of the bounded program can produce), so thin-air values never appear.
inline void for_each_execution(const LitmusProgram& p, const Bounds& b,
                               const std::function<void(const C11Execution&)>& fn)
{
    detail::check_value_bound(p, b);
    auto paths = detail::thread_paths(p, b);
    for (const auto& t : paths) {
        if (t.empty()) {
            return;
        }
    }

    std::vector<std::size_t> pick(p.threads.size(), 0);
    for (;;) {
        // Assemble the events of this path combination.
        std::vector<MemoryEvent> events;
        for (const auto& [loc, v] : p.init) {
            MemoryEvent e;
            e.tag = "init:" + to_string(loc);
            e.process = init_process();
            e.kind = EventKind::write;
            e.location = loc;
            e.wval = v;
            events.push_back(std::move(e));
        }
        const std::size_t n_init = events.size();
        std::vector<std::pair<std::size_t, std::size_t>> spans;
        for (std::size_t t = 0; t < paths.size(); ++t) {
            const auto& path = paths[t][pick[t]];
            spans.emplace_back(events.size(), events.size() + path.size());
            events.insert(events.end(), path.begin(), path.end());
        }
        const auto n = events.size();
        if (n > b.max_events) {
            throw BoundExceeded("events in execution", n, b.max_events);
        }
        for (std::size_t i = 0; i < n_init; ++i) {
            std::set<ObjectId> users;
            for (std::size_t j = n_init; j < n; ++j) {
                if (events[j].location == events[i].location && !events[j].object.empty()) {
                    users.insert(events[j].object);
                }
            }
            if (users.size() == 1) {
                events[i].object = *users.begin();
            } else if (users.empty() && p.stacks.contains(events[i].location.base)) {
                events[i].object = events[i].location.base;
            }
        }

        Relation sb(n);
        for (std::size_t i = 0; i < n_init; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                sb.insert(i, j);
            }
        }
        for (const auto& [lo, hi] : spans) {
            for (auto i = lo; i < hi; ++i) {
                for (auto j = i + 1; j < hi; ++j) {
                    sb.insert(i, j);
                }
            }
        }

        std::vector<std::size_t> queries;
        std::vector<std::vector<std::size_t>> sources;
        bool feasible = true;
        for (std::size_t q = 0; q < n && feasible; ++q) {
            if (!events[q].is_query()) {
                continue;
            }
            std::vector<std::size_t> src;
            for (std::size_t w = 0; w < n; ++w) {
                if (w != q && events[w].is_mod() && events[w].location == events[q].location &&
                    events[w].wval == events[q].rval) {
                    src.push_back(w);
                }
            }
            feasible = !src.empty();
            queries.push_back(q);
            sources.push_back(std::move(src));
        }

        std::map<Location, std::vector<std::size_t>> mods;
        for (std::size_t i = 0; i < n; ++i) {
            if (events[i].is_mod()) {
                mods[events[i].location].push_back(i);
            }
        }

        Relation rf(n);
        std::vector<std::pair<std::size_t, std::size_t>> chosen;
        // A choice is dropped as soon as hb has a cycle, a read is hb-before
        // its source, or a read's source is hb-overwritten before the read.
        auto coherent = [&](const Relation& hb) {
            for (const auto& [w, r] : chosen) {
                if (hb.contains(r, w) || w == r) {
                    return false;
                }
                for (auto m : mods[events[r].location]) {
                    if (m != w && m != r && hb.contains(w, m) && hb.contains(m, r)) {
                        return false;
                    }
                }
            }
            return true;
        };
        const Relation sb_hb = sb.transitive_closure();
        std::function<void(std::size_t, const Relation&)> choose_rf = [&](std::size_t k,
                                                                         const Relation& hb_k) {
            if (k < queries.size()) {
                const auto q = queries[k];
                for (auto w : sources[k]) {
                    if (hb_k.contains(q, w)) {
                        continue;
                    }
                    Relation hb = hb_k;
                    if (events[w].releasing() && events[q].acquiring() && !hb.contains(w, q)) {
                        for (std::size_t a = 0; a < n; ++a) {
                            if (a != w && !hb.contains(a, w)) {
                                continue;
                            }
                            for (std::size_t c = 0; c < n; ++c) {
                                if (c == q || hb.contains(q, c)) {
                                    hb.insert(a, c);
                                }
                            }
                        }
                        if (!hb.irreflexive()) {
                            continue;
                        }
                    }
                    rf.insert(w, q);
                    chosen.emplace_back(w, q);
                    if (coherent(hb)) {
                        choose_rf(k + 1, hb);
                    }
                    chosen.pop_back();
                    rf.erase(w, q);
                }
                return;
            }
            const Relation& hb = hb_k;
            // Per location: mo orders extending hb whose fr edges respect hb.
            std::vector<std::vector<std::vector<std::size_t>>> orders;
            for (const auto& [loc, ms] : mods) {
                std::vector<std::vector<std::size_t>> ok;
                detail::linear_extensions(ms, hb, [&](const std::vector<std::size_t>& seq) {
                    std::map<std::size_t, std::size_t> pos;
                    for (std::size_t i = 0; i < seq.size(); ++i) {
                        pos[seq[i]] = i;
                    }
                    for (const auto& [w, r] : chosen) {
                        if (events[r].location != loc) {
                            continue;
                        }
                        for (auto i = pos.at(w) + 1; i < seq.size(); ++i) {
                            if (seq[i] != r && hb.contains(seq[i], r)) {
                                return;
                            }
                        }
                    }
                    ok.push_back(seq);
                });
                if (ok.empty()) {
                    return;
                }
                orders.push_back(std::move(ok));
            }
            std::vector<std::size_t> choice(orders.size(), 0);
            for (;;) {
                Relation mo(n);
                for (std::size_t l = 0; l < orders.size(); ++l) {
                    const auto& seq = orders[l][choice[l]];
                    for (std::size_t i = 0; i < seq.size(); ++i) {
                        for (std::size_t j = i + 1; j < seq.size(); ++j) {
                            mo.insert(seq[i], seq[j]);
                        }
                    }
                }
                C11Execution d(events, sb, rf, mo);
                if (validate(d).pass() && consistent(d).pass()) {
                    fn(d);
                }
                std::size_t l = orders.size();
                while (l > 0) {
                    --l;
                    if (++choice[l] < orders[l].size()) {
                        break;
                    }
                    choice[l] = 0;
                    if (l == 0) {
                        return;
                    }
                }
                if (orders.empty()) {
                    return;
                }
            }
        };
        if (feasible && sb_hb.irreflexive()) {
            choose_rf(0, sb_hb);
        }

        std::size_t t = pick.size();
        while (t > 0) {
            --t;
            if (++pick[t] < paths[t].size()) {
                break;
            }
            pick[t] = 0;
            if (t == 0) {
                return;
            }
        }
        if (pick.empty()) {
            return;
        }
    }
}

inline std::vector<C11Execution> enumerate_executions(const LitmusProgram& p, const Bounds& b)
{
    std::vector<C11Execution> out;
    for_each_execution(p, b, [&](const C11Execution& d) { out.push_back(d); });
    return out;
}

}  // namespace causalin
