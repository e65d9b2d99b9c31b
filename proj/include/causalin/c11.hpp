#pragma once

#include <algorithm>
#include <compare>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "causalin/errors.hpp"
#include "causalin/exstruct.hpp"
#include "causalin/label.hpp"
#include "causalin/relation.hpp"

namespace causalin {

/// A base location with a (possibly empty) field path: x, x.f, x.f.g.
/// Bases never contain '.', which keeps x.f addressing injective.
struct Location {
    std::string base;
    std::vector<std::string> fields;

    Location field(const std::string& f) const
    {
        Location l = *this;
        l.fields.push_back(f);
        return l;
    }

    bool empty() const { return base.empty(); }

    friend auto operator<=>(const Location&, const Location&) = default;
};

inline std::string to_string(const Location& l)
{
    std::string out = l.base;
    for (const auto& f : l.fields) {
        out += "." + f;
    }
    return out;
}

inline Location parse_location(const std::string& text)
{
    Location l;
    std::size_t start = 0;
    bool first = true;
    while (true) {
        auto dot = text.find('.', start);
        auto part = text.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (part.empty()) {
            throw MalformedInput("bad location '" + text + "'");
        }
        if (first) {
            l.base = part;
            first = false;
        } else {
            l.fields.push_back(part);
        }
        if (dot == std::string::npos) {
            break;
        }
        start = dot + 1;
    }
    return l;
}

/// A value stored in memory: null, an integer, or a reference to an
/// allocated (or global) base location.
struct Datum {
    enum class Kind { null, integer, pointer };

    Kind kind = Kind::null;
    Value value = 0;
    std::string pointee;

    static Datum null() { return {}; }
    static Datum integer(Value v) { return {Kind::integer, v, {}}; }
    static Datum pointer(std::string base) { return {Kind::pointer, 0, std::move(base)}; }

    bool is_null() const { return kind == Kind::null; }

    friend auto operator<=>(const Datum&, const Datum&) = default;
};

inline std::string to_string(const Datum& d)
{
    switch (d.kind) {
    case Datum::Kind::null:
        return "null";
    case Datum::Kind::pointer:
        return "&" + d.pointee;
    case Datum::Kind::integer:
        break;
    }
    return std::to_string(d.value);
}

enum class EventKind { read, write, update, invocation, response, allocation };
enum class Annotation { none, release, acquire, release_acquire };

inline const char* to_string(EventKind k)
{
    switch (k) {
    case EventKind::read:
        return "R";
    case EventKind::write:
        return "W";
    case EventKind::update:
        return "U";
    case EventKind::invocation:
        return "inv";
    case EventKind::response:
        return "res";
    case EventKind::allocation:
        return "alloc";
    }
    return "?";
}

inline const char* to_string(Annotation a)
{
    switch (a) {
    case Annotation::none:
        return "rlx";
    case Annotation::release:
        return "rel";
    case Annotation::acquire:
        return "acq";
    case Annotation::release_acquire:
        return "acqrel";
    }
    return "?";
}

inline const std::string& init_process()
{
    static const std::string p = "init";
    return p;
}

struct MemoryEvent {
    EventTag tag;
    ProcessId process;
    EventKind kind = EventKind::read;
    /// Accessed (or allocated) location; empty for method events.
    Location location;
    Datum rval;
    Datum wval;
    Annotation annotation = Annotation::none;
    /// Object the event belongs to; empty if unattributed.
    ObjectId object;
    /// Invocation events: the invocation. Response events: object only.
    Invocation invocation;
    Response response;

    bool is_query() const { return kind == EventKind::read || kind == EventKind::update; }
    bool is_mod() const { return kind == EventKind::write || kind == EventKind::update; }
    bool is_memory() const { return is_query() || kind == EventKind::write; }
    bool is_method() const
    {
        return kind == EventKind::invocation || kind == EventKind::response;
    }
    bool releasing() const
    {
        return annotation == Annotation::release || annotation == Annotation::release_acquire;
    }
    bool acquiring() const
    {
        return annotation == Annotation::acquire || annotation == Annotation::release_acquire;
    }

    friend bool operator==(const MemoryEvent&, const MemoryEvent&) = default;
};

inline std::string describe(const MemoryEvent& e)
{
    std::string ann = e.annotation == Annotation::none ? "" : std::string("^") + to_string(e.annotation);
    switch (e.kind) {
    case EventKind::read:
        return e.tag + ":R" + ann + "(" + to_string(e.location) + "," + to_string(e.rval) + ")";
    case EventKind::write:
        return e.tag + ":W" + ann + "(" + to_string(e.location) + "," + to_string(e.wval) + ")";
    case EventKind::update:
        return e.tag + ":U" + ann + "(" + to_string(e.location) + "," + to_string(e.rval) + "," +
               to_string(e.wval) + ")";
    case EventKind::invocation:
        return e.tag + ":inv " + to_string(e.invocation);
    case EventKind::response:
        return e.tag + ":res " + e.object + "." + to_string(e.response);
    case EventKind::allocation:
        return e.tag + ":A(" + to_string(e.location) + ")";
    }
    return e.tag;
}

/// D = (D, sb, rf, mo). Nothing beyond tag uniqueness is enforced; see
/// validate() and consistent().
class C11Execution {
  public:
    C11Execution() = default;

    C11Execution(std::vector<MemoryEvent> events, Relation sb, Relation rf, Relation mo)
        : events_(std::move(events)), sb_(std::move(sb)), rf_(std::move(rf)), mo_(std::move(mo))
    {
        const auto n = events_.size();
        if (sb_.size() != n || rf_.size() != n || mo_.size() != n) {
            throw MalformedInput("relation size does not match event count");
        }
        for (std::size_t i = 0; i < n; ++i) {
            if (!index_.emplace(events_[i].tag, i).second) {
                throw MalformedInput("duplicate event tag '" + events_[i].tag + "'");
            }
        }
    }

    static C11Execution from_tag_pairs(std::vector<MemoryEvent> events,
                                       const std::vector<TagPair>& sb,
                                       const std::vector<TagPair>& rf,
                                       const std::vector<TagPair>& mo)
    {
        std::map<EventTag, std::size_t> idx;
        for (std::size_t i = 0; i < events.size(); ++i) {
            idx.emplace(events[i].tag, i);
        }
        auto build = [&](const std::vector<TagPair>& pairs, const char* name) {
            Relation r(events.size());
            for (const auto& [a, b] : pairs) {
                auto ia = idx.find(a);
                auto ib = idx.find(b);
                if (ia == idx.end() || ib == idx.end()) {
                    throw MalformedInput(std::string("dangling tag in ") + name + ": (" + a +
                                         ", " + b + ")");
                }
                r.insert(ia->second, ib->second);
            }
            return r;
        };
        auto s = build(sb, "sb");
        auto r = build(rf, "rf");
        auto m = build(mo, "mo");
        return C11Execution(std::move(events), std::move(s), std::move(r), std::move(m));
    }

    std::size_t size() const { return events_.size(); }
    const std::vector<MemoryEvent>& events() const { return events_; }
    const MemoryEvent& event(std::size_t i) const { return events_[i]; }
    const Relation& sb() const { return sb_; }
    const Relation& rf() const { return rf_; }
    const Relation& mo() const { return mo_; }

    std::optional<std::size_t> index_of(const EventTag& tag) const
    {
        auto it = index_.find(tag);
        if (it == index_.end()) {
            return std::nullopt;
        }
        return it->second;
    }

    std::size_t require_index(const EventTag& tag) const
    {
        auto i = index_of(tag);
        if (!i) {
            throw MalformedInput("unknown event tag '" + tag + "'");
        }
        return *i;
    }

    std::vector<TagPair> tag_pairs(const Relation& r) const
    {
        std::vector<TagPair> out;
        for (const auto& [a, b] : r.pairs()) {
            out.emplace_back(events_[a].tag, events_[b].tag);
        }
        return out;
    }

    std::set<ProcessId> processes() const
    {
        std::set<ProcessId> ps;
        for (const auto& e : events_) {
            ps.insert(e.process);
        }
        return ps;
    }

    /// Events of p in sb order (ties broken by position).
    std::vector<std::size_t> process_events(const ProcessId& p) const
    {
        std::vector<std::size_t> mine;
        for (std::size_t i = 0; i < events_.size(); ++i) {
            if (events_[i].process == p) {
                mine.push_back(i);
            }
        }
        std::stable_sort(mine.begin(), mine.end(),
                         [&](std::size_t a, std::size_t b) { return sb_.contains(a, b); });
        return mine;
    }

    /// The query's rf source, if it has exactly one.
    std::optional<std::size_t> source(std::size_t r) const
    {
        auto preds = rf_.predecessors(r);
        if (preds.size() != 1) {
            return std::nullopt;
        }
        return preds.front();
    }

    /// Order-insensitive identity: same events (by tag) and relations.
    friend bool operator==(const C11Execution& a, const C11Execution& b)
    {
        if (a.size() != b.size()) {
            return false;
        }
        std::vector<std::size_t> map(a.size());
        for (std::size_t i = 0; i < a.size(); ++i) {
            auto j = b.index_of(a.events_[i].tag);
            if (!j || !(b.events_[*j] == a.events_[i])) {
                return false;
            }
            map[i] = *j;
        }
        return b.sb_.restricted(map) == a.sb_ && b.rf_.restricted(map) == a.rf_ &&
               b.mo_.restricted(map) == a.mo_;
    }

  private:
    std::vector<MemoryEvent> events_;
    std::map<EventTag, std::size_t> index_;
    Relation sb_;
    Relation rf_;
    Relation mo_;
};

// ---------------------------------------------------------------------------
// Validity

struct ClauseReport {
    std::string clause;
    std::vector<std::string> violations;

    bool pass() const { return violations.empty(); }
};

struct ValidityReport {
    /// V1..V6 then A1..A3, in that order.
    std::vector<ClauseReport> clauses;

    bool pass() const
    {
        return std::all_of(clauses.begin(), clauses.end(),
                           [](const ClauseReport& c) { return c.pass(); });
    }

    const ClauseReport& operator[](const std::string& name) const
    {
        for (const auto& c : clauses) {
            if (c.clause == name) {
                return c;
            }
        }
        throw PreconditionFailed("no clause '" + name + "'");
    }
};

inline ValidityReport validate(const C11Execution& d)
{
    ValidityReport rep;
    for (const char* c : {"V1", "V2", "V3", "V4", "V5", "V6", "A1", "A2", "A3"}) {
        rep.clauses.push_back({c, {}});
    }
    auto& v1 = rep.clauses[0].violations;
    auto& v2 = rep.clauses[1].violations;
    auto& v3 = rep.clauses[2].violations;
    auto& v4 = rep.clauses[3].violations;
    auto& v5 = rep.clauses[4].violations;
    auto& v6 = rep.clauses[5].violations;
    auto& a1 = rep.clauses[6].violations;
    auto& a2 = rep.clauses[7].violations;
    auto& a3 = rep.clauses[8].violations;
    const auto n = d.size();
    auto tag = [&](std::size_t i) { return d.event(i).tag; };

    if (!d.sb().irreflexive()) {
        v1.push_back("sb is reflexive");
    }
    if (!d.sb().transitive()) {
        v1.push_back("sb is not transitive");
    }
    for (const auto& p : d.processes()) {
        std::vector<std::size_t> mine;
        for (std::size_t i = 0; i < n; ++i) {
            if (d.event(i).process == p) {
                mine.push_back(i);
            }
        }
        if (!d.sb().total_on(mine)) {
            v1.push_back("sb not total on process " + p);
        }
    }

    for (const auto& [w, r] : d.rf().pairs()) {
        const auto& ew = d.event(w);
        const auto& er = d.event(r);
        if (!ew.is_mod() || !er.is_query()) {
            v2.push_back("rf edge " + tag(w) + " -> " + tag(r) + " is not Mod -> Qry");
            continue;
        }
        if (ew.location != er.location) {
            v2.push_back("rf edge " + tag(w) + " -> " + tag(r) + " crosses locations");
        }
        if (ew.wval != er.rval) {
            v2.push_back("rf edge " + tag(w) + " -> " + tag(r) + " value mismatch");
        }
    }
    for (std::size_t r = 0; r < n; ++r) {
        if (!d.event(r).is_query()) {
            continue;
        }
        auto srcs = d.rf().predecessors(r);
        if (srcs.empty()) {
            v3.push_back("query " + tag(r) + " reads from nothing");
        } else if (srcs.size() > 1) {
            v3.push_back("query " + tag(r) + " reads from several writes");
        }
    }

    for (const auto& [a, b] : d.mo().pairs()) {
        const auto& ea = d.event(a);
        const auto& eb = d.event(b);
        if (!ea.is_mod() || !eb.is_mod() || ea.location != eb.location) {
            v4.push_back("mo edge " + tag(a) + " -> " + tag(b) + " not between same-location modifications");
        }
    }
    if (!d.mo().irreflexive() || !d.mo().transitive()) {
        v5.push_back("mo is not a strict order");
    }
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = a + 1; b < n; ++b) {
            const auto& ea = d.event(a);
            const auto& eb = d.event(b);
            if (ea.is_mod() && eb.is_mod() && ea.location == eb.location &&
                !d.mo().contains(a, b) && !d.mo().contains(b, a)) {
                v5.push_back("modifications " + tag(a) + " and " + tag(b) + " unordered by mo");
            }
        }
    }

    for (const auto& p : d.processes()) {
        std::optional<std::size_t> open;
        for (auto i : d.process_events(p)) {
            const auto& e = d.event(i);
            if (e.kind == EventKind::invocation) {
                if (open) {
                    v6.push_back("process " + p + " invokes " + e.tag + " inside " + tag(*open));
                }
                open = i;
            } else if (e.kind == EventKind::response) {
                if (!open) {
                    v6.push_back("process " + p + " responds " + e.tag + " without invocation");
                } else if (d.event(*open).invocation.object != e.object) {
                    v6.push_back("response " + e.tag + " does not match " + tag(*open));
                }
                open.reset();
            }
        }
    }

    std::map<Location, std::size_t> allocated;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& e = d.event(i);
        if (e.kind != EventKind::allocation) {
            continue;
        }
        if (!allocated.emplace(e.location, i).second) {
            a1.push_back("location " + to_string(e.location) + " allocated twice");
        }
        if (!e.location.fields.empty()) {
            a3.push_back("allocation of field location " + to_string(e.location));
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        const auto& l = d.event(i).location;
        if (l.base.find('.') != std::string::npos) {
            a2.push_back("base name " + l.base + " makes field addressing ambiguous");
        }
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Derived relations and consistency

struct DerivedRelations {
    Relation sw;
    Relation fr;
    Relation hb;
};

inline DerivedRelations derive(const C11Execution& d)
{
    const auto n = d.size();
    DerivedRelations out{Relation(n), Relation(n), Relation(n)};
    for (const auto& [w, r] : d.rf().pairs()) {
        if (d.event(w).releasing() && d.event(r).acquiring()) {
            out.sw.insert(w, r);
        }
    }
    out.fr = d.rf().inverse().compose(d.mo()) - Relation::identity(n);
    out.hb = (d.sb() | out.sw).transitive_closure();
    return out;
}

struct ConsistencyReport {
    /// C1: an event on an hb cycle, if any.
    std::optional<EventTag> hb_cycle;
    /// C2: (a, b) with hb(a, b) and (mo ∪ rf ∪ fr)(b, a), if any.
    std::optional<TagPair> c2_pair;
    std::string c2_relation;

    bool c1() const { return !hb_cycle; }
    bool c2() const { return !c2_pair; }
    bool pass() const { return c1() && c2(); }
};

inline ConsistencyReport consistent(const C11Execution& d, const DerivedRelations& r)
{
    ConsistencyReport rep;
    const auto n = d.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (r.hb.contains(i, i)) {
            rep.hb_cycle = d.event(i).tag;
            break;
        }
    }
    for (std::size_t a = 0; a < n && !rep.c2_pair; ++a) {
        for (std::size_t b = 0; b < n; ++b) {
            if (!r.hb.contains(a, b)) {
                continue;
            }
            const char* which = d.mo().contains(b, a)   ? "mo"
                                : d.rf().contains(b, a) ? "rf"
                                : r.fr.contains(b, a)   ? "fr"
                                                        : nullptr;
            if (which) {
                rep.c2_pair = TagPair{d.event(a).tag, d.event(b).tag};
                rep.c2_relation = which;
                break;
            }
        }
    }
    return rep;
}

inline ConsistencyReport consistent(const C11Execution& d)
{
    return consistent(d, derive(d));
}

/// Updates that are not immediately mo-after the write they read from.
/// Not part of the model's axioms; a diagnostic for CAS atomicity.
inline std::vector<EventTag> cas_atomicity_violations(const C11Execution& d)
{
    std::vector<EventTag> out;
    for (std::size_t u = 0; u < d.size(); ++u) {
        if (d.event(u).kind != EventKind::update) {
            continue;
        }
        auto w = d.source(u);
        if (!w) {
            continue;
        }
        for (std::size_t m = 0; m < d.size(); ++m) {
            if (d.mo().contains(*w, m) && d.mo().contains(m, u)) {
                out.push_back(d.event(u).tag);
                break;
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Bridge to histories and execution structures

inline void require_valid_consistent(const C11Execution& d)
{
    auto v = validate(d);
    if (!v.pass()) {
        for (const auto& c : v.clauses) {
            if (!c.pass()) {
                throw PreconditionFailed("invalid C11 execution (" + c.clause + "): " +
                                         c.violations.front());
            }
        }
    }
    if (!consistent(d).pass()) {
        throw PreconditionFailed("inconsistent C11 execution");
    }
}

/// hist(D): hb restricted to invocation and response events.
inline History hist(const C11Execution& d)
{
    require_valid_consistent(d);
    auto hb = derive(d).hb;
    std::vector<std::size_t> keep;
    std::vector<HistoryAction> actions;
    for (std::size_t i = 0; i < d.size(); ++i) {
        const auto& e = d.event(i);
        if (e.kind == EventKind::invocation) {
            actions.push_back(HistoryAction::invoke(e.tag, e.process, e.invocation));
        } else if (e.kind == EventKind::response) {
            actions.push_back(HistoryAction::respond(e.tag, e.process, e.object, e.response));
        } else {
            continue;
        }
        keep.push_back(i);
    }
    return History(std::move(actions), hb.restricted(keep));
}

/// close(exec(hist(D))). Closure cannot fail for a history derived from
/// an acyclic hb; a failure is reported as a broken invariant.
inline ExecutionStructure exec_structure(const C11Execution& d)
{
    auto h = hist(d);
    auto candidate = from_history(h);
    auto closed = close(candidate);
    if (!closed.ok()) {
        throw InvariantViolation("closure of exec(hist(D)) failed: " + describe(*closed.failure));
    }
    return *closed.structure;
}

/// D_x: the events attributed to x with sb, rf and mo restricted.
inline C11Execution restrict_to_object(const C11Execution& d, const ObjectId& x)
{
    std::vector<std::size_t> keep;
    std::vector<MemoryEvent> events;
    for (std::size_t i = 0; i < d.size(); ++i) {
        const auto& e = d.event(i);
        if (e.object.empty()) {
            throw PreconditionFailed("event '" + e.tag + "' is not attributed to an object");
        }
        if (e.object == x) {
            keep.push_back(i);
            events.push_back(e);
        }
    }
    return C11Execution(std::move(events), d.sb().restricted(keep), d.rf().restricted(keep),
                        d.mo().restricted(keep));
}

/// The memory event's operation span: the invocation before it and the
/// response after it on the same process.
inline std::size_t mu(const C11Execution& d, const EventTag& tag)
{
    auto e = d.require_index(tag);
    if (!d.event(e).is_memory() && d.event(e).kind != EventKind::allocation) {
        throw PreconditionFailed("'" + tag + "' is not a memory event");
    }
    std::optional<std::size_t> last;
    for (auto i : d.process_events(d.event(e).process)) {
        if (i == e) {
            break;
        }
        const auto k = d.event(i).kind;
        if (k == EventKind::invocation) {
            last = i;
        } else if (k == EventKind::response) {
            last.reset();
        }
    }
    if (!last) {
        throw PreconditionFailed("'" + tag + "' is outside every operation");
    }
    return *last;
}

inline std::size_t nu(const C11Execution& d, const EventTag& tag)
{
    mu(d, tag);
    auto e = d.require_index(tag);
    bool after = false;
    for (auto i : d.process_events(d.event(e).process)) {
        if (i == e) {
            after = true;
        } else if (after && d.event(i).kind == EventKind::response) {
            return i;
        } else if (after && d.event(i).kind == EventKind::invocation) {
            break;
        }
    }
    throw PreconditionFailed("'" + tag + "' is outside every operation");
}

}  // namespace causalin
