#pragma once

#include <algorithm>
#include <array>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "causalin/errors.hpp"
#include "causalin/label.hpp"
#include "causalin/relation.hpp"

namespace causalin {

using TagPair = std::pair<EventTag, EventTag>;

/// An operation as seen by an execution structure: (g, p, a). A missing
/// response marks an incomplete (pending) operation.
struct Event {
    EventTag tag;
    ProcessId process;
    Invocation invocation;
    std::optional<Response> response;

    bool complete() const { return response.has_value(); }
    const ObjectId& object() const { return invocation.object; }

    Label label() const
    {
        if (!response) {
            throw IncompleteHistory("event '" + tag + "' has no response");
        }
        return Label{invocation, *response};
    }

    friend bool operator==(const Event&, const Event&) = default;
};

inline std::string to_string(const Event& e)
{
    if (e.response) {
        return to_string(e.label());
    }
    return "(" + to_string(e.invocation) + ",pending)";
}

/// Finite event set with a precedence relation (hard) and a communication
/// relation (soft). The type does not enforce the axioms: use
/// validate_axioms() or build through close().
///
/// Events are kept sorted by tag, so index order is tag order.
class ExecutionStructure {
  public:
    ExecutionStructure() = default;

    ExecutionStructure(std::vector<Event> events, Relation hard, Relation soft,
                       std::set<ObjectId> objects = {})
    {
        if (hard.size() != events.size() || soft.size() != events.size()) {
            throw MalformedInput("relation size does not match event count");
        }
        std::vector<std::size_t> order(events.size());
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return events[a].tag < events[b].tag;
        });
        for (std::size_t i = 0; i < order.size(); ++i) {
            events_.push_back(std::move(events[order[i]]));
            if (i > 0 && events_[i - 1].tag == events_[i].tag) {
                throw MalformedInput("duplicate event tag '" + events_[i].tag + "'");
            }
            index_.emplace(events_[i].tag, i);
        }
        hard_ = hard.restricted(order);
        soft_ = soft.restricted(order);
        objects_ = std::move(objects);
        for (const auto& e : events_) {
            objects_.insert(e.object());
        }
    }

    /// Builds from tag pairs; a tag not naming an event is malformed input.
    static ExecutionStructure from_tag_pairs(std::vector<Event> events,
                                             const std::vector<TagPair>& hard,
                                             const std::vector<TagPair>& soft,
                                             std::set<ObjectId> objects = {})
    {
        std::map<EventTag, std::size_t> idx;
        for (std::size_t i = 0; i < events.size(); ++i) {
            if (!idx.emplace(events[i].tag, i).second) {
                throw MalformedInput("duplicate event tag '" + events[i].tag + "'");
            }
        }
        auto build = [&](const std::vector<TagPair>& pairs, const char* name) {
            Relation r(events.size());
            for (const auto& [a, b] : pairs) {
                auto ia = idx.find(a);
                auto ib = idx.find(b);
                if (ia == idx.end() || ib == idx.end()) {
                    throw MalformedInput(std::string("dangling tag in ") + name + " relation: (" +
                                         a + ", " + b + ")");
                }
                r.insert(ia->second, ib->second);
            }
            return r;
        };
        Relation h = build(hard, "hard");
        Relation s = build(soft, "soft");
        return ExecutionStructure(std::move(events), std::move(h), std::move(s),
                                  std::move(objects));
    }

    std::size_t size() const { return events_.size(); }
    const std::vector<Event>& events() const { return events_; }
    const Event& event(std::size_t i) const { return events_[i]; }
    const EventTag& tag(std::size_t i) const { return events_[i].tag; }
    const Relation& hard() const { return hard_; }
    const Relation& soft() const { return soft_; }
    const std::set<ObjectId>& objects() const { return objects_; }

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

    std::vector<TagPair> hard_pairs() const { return tag_pairs(hard_); }
    std::vector<TagPair> soft_pairs() const { return tag_pairs(soft_); }

    bool has_hard(const EventTag& a, const EventTag& b) const
    {
        auto ia = index_of(a);
        auto ib = index_of(b);
        return ia && ib && hard_.contains(*ia, *ib);
    }

    bool has_soft(const EventTag& a, const EventTag& b) const
    {
        auto ia = index_of(a);
        auto ib = index_of(b);
        return ia && ib && soft_.contains(*ia, *ib);
    }

    bool complete() const
    {
        return std::all_of(events_.begin(), events_.end(),
                           [](const Event& e) { return e.complete(); });
    }

    ExecutionStructure with_relations(Relation hard, Relation soft) const
    {
        return ExecutionStructure(events_, std::move(hard), std::move(soft), objects_);
    }

    /// Same tags and relations, relabelled events (tags must be unchanged).
    ExecutionStructure with_events(std::vector<Event> events) const
    {
        for (std::size_t i = 0; i < events.size(); ++i) {
            if (i >= events_.size() || events[i].tag != events_[i].tag) {
                throw PreconditionFailed("relabelling must keep tags in place");
            }
        }
        ExecutionStructure out = *this;
        out.events_ = std::move(events);
        for (const auto& e : out.events_) {
            out.objects_.insert(e.object());
        }
        return out;
    }

    friend bool operator==(const ExecutionStructure& a, const ExecutionStructure& b)
    {
        return a.events_ == b.events_ && a.hard_ == b.hard_ && a.soft_ == b.soft_;
    }

  private:
    std::vector<Event> events_;
    std::map<EventTag, std::size_t> index_;
    Relation hard_;
    Relation soft_;
    std::set<ObjectId> objects_;
};

// ---------------------------------------------------------------------------
// Axioms

enum class Axiom : std::size_t { a1 = 0, a2 = 1, a3 = 2, a4 = 3 };

inline const char* axiom_name(Axiom a)
{
    static constexpr std::array<const char*, 4> names{"A1", "A2", "A3", "A4"};
    return names[static_cast<std::size_t>(a)];
}

struct AxiomViolation {
    std::string rule;
    std::vector<EventTag> tuple;

    friend bool operator==(const AxiomViolation&, const AxiomViolation&) = default;
};

struct AxiomVerdict {
    std::vector<AxiomViolation> violations;

    bool pass() const { return violations.empty(); }
};

struct AxiomReport {
    std::array<AxiomVerdict, 4> axioms;

    const AxiomVerdict& operator[](Axiom a) const { return axioms[static_cast<std::size_t>(a)]; }

    bool pass() const
    {
        return std::all_of(axioms.begin(), axioms.end(),
                           [](const AxiomVerdict& v) { return v.pass(); });
    }
};

/// Checks A1-A4 and lists every violating tuple:
///   A1  hard is irreflexive, antisymmetric and transitive
///   A2  hard is contained in soft, and hard never reverses soft
///   A3  hard;soft and soft;hard are contained in soft
///   A4  hard;soft;hard is contained in hard
inline AxiomReport validate_axioms(const ExecutionStructure& s)
{
    AxiomReport report;
    const auto n = s.size();
    const auto& hard = s.hard();
    const auto& soft = s.soft();
    auto t = [&](std::size_t i) { return s.tag(i); };
    auto& a1 = report.axioms[0].violations;
    auto& a2 = report.axioms[1].violations;
    auto& a3 = report.axioms[2].violations;
    auto& a4 = report.axioms[3].violations;

    for (std::size_t a = 0; a < n; ++a) {
        if (hard.contains(a, a)) {
            a1.push_back({"irreflexive", {t(a), t(a)}});
        }
    }
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = a + 1; b < n; ++b) {
            if (hard.contains(a, b) && hard.contains(b, a)) {
                a1.push_back({"antisymmetric", {t(a), t(b)}});
            }
        }
    }
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = 0; b < n; ++b) {
            if (!hard.contains(a, b)) {
                continue;
            }
            for (std::size_t c = 0; c < n; ++c) {
                if (hard.contains(b, c) && !hard.contains(a, c)) {
                    a1.push_back({"transitive", {t(a), t(b), t(c)}});
                }
            }
            if (!soft.contains(a, b)) {
                a2.push_back({"hard-in-soft", {t(a), t(b)}});
            }
            if (soft.contains(b, a)) {
                a2.push_back({"no-soft-reversal", {t(a), t(b)}});
            }
        }
    }
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = 0; b < n; ++b) {
            for (std::size_t c = 0; c < n; ++c) {
                if (soft.contains(a, c)) {
                    continue;
                }
                if (hard.contains(a, b) && soft.contains(b, c)) {
                    a3.push_back({"hard;soft", {t(a), t(b), t(c)}});
                }
                if (soft.contains(a, b) && hard.contains(b, c)) {
                    a3.push_back({"soft;hard", {t(a), t(b), t(c)}});
                }
            }
        }
    }
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = 0; b < n; ++b) {
            if (!hard.contains(a, b)) {
                continue;
            }
            for (std::size_t c = 0; c < n; ++c) {
                if (!soft.contains(b, c)) {
                    continue;
                }
                for (std::size_t d = 0; d < n; ++d) {
                    if (hard.contains(c, d) && !hard.contains(a, d)) {
                        a4.push_back({"hard;soft;hard", {t(a), t(b), t(c), t(d)}});
                    }
                }
            }
        }
    }
    return report;
}

// ---------------------------------------------------------------------------
// Closure

struct ClosureFailure {
    enum class Kind { hard_cycle, soft_reversal };

    Kind kind;
    /// For hard_cycle: a cycle a, b, a in the saturated hard relation (a == b
    /// for a self loop). For soft_reversal: the hard pair (a, b) whose
    /// reverse is in soft.
    std::vector<EventTag> witness;
    /// The saturated candidate at which the failure was detected.
    ExecutionStructure saturated;
};

inline std::string describe(const ClosureFailure& f)
{
    std::string w;
    for (const auto& t : f.witness) {
        w += (w.empty() ? "" : " -> ") + t;
    }
    if (f.kind == ClosureFailure::Kind::hard_cycle) {
        return "A1: precedence cycle " + w;
    }
    return "A2: precedence " + w + " reverses a communication edge";
}

struct ClosureResult {
    std::optional<ExecutionStructure> structure;
    std::optional<ClosureFailure> failure;

    bool ok() const { return structure.has_value(); }

    const ExecutionStructure& value() const
    {
        if (!structure) {
            throw PreconditionFailed("closure failed: " + describe(*failure));
        }
        return *structure;
    }
};

/// Least structure containing hard0 in hard and soft0 in soft that is
/// closed under transitivity of hard, hard in soft, A3 and A4. Fails iff
/// the fixpoint breaks A1 or A2.
inline ClosureResult close(std::vector<Event> events, Relation hard0, Relation soft0,
                           std::set<ObjectId> objects = {})
{
    Relation hard = std::move(hard0);
    Relation soft = std::move(soft0);
    for (;;) {
        Relation h = hard.transitive_closure();
        h |= h.compose(soft).compose(h);
        Relation s = soft | h;
        s |= h.compose(s);
        s |= s.compose(h);
        if (h == hard && s == soft) {
            break;
        }
        hard = std::move(h);
        soft = std::move(s);
    }
    ExecutionStructure sat(std::move(events), std::move(hard), std::move(soft),
                           std::move(objects));
    const auto& H = sat.hard();
    const auto& S = sat.soft();
    for (std::size_t a = 0; a < sat.size(); ++a) {
        if (!H.contains(a, a)) {
            continue;
        }
        std::size_t b = a;
        for (std::size_t c = 0; c < sat.size(); ++c) {
            if (c != a && H.contains(a, c) && H.contains(c, a)) {
                b = c;
                break;
            }
        }
        std::vector<EventTag> cycle{sat.tag(a), sat.tag(b), sat.tag(a)};
        if (a == b) {
            cycle.pop_back();
        }
        return {std::nullopt, ClosureFailure{ClosureFailure::Kind::hard_cycle, cycle, sat}};
    }
    for (const auto& [a, b] : H.pairs()) {
        if (S.contains(b, a)) {
            return {std::nullopt,
                    ClosureFailure{ClosureFailure::Kind::soft_reversal, {sat.tag(a), sat.tag(b)}, sat}};
        }
    }
    return {std::move(sat), std::nullopt};
}

inline ClosureResult close(const ExecutionStructure& s)
{
    return close(s.events(), s.hard(), s.soft(), s.objects());
}

// ---------------------------------------------------------------------------
// Restriction and refinement

/// The structure restricted to events of one object. The object must be
/// known to the structure (declared or used); an object without events
/// yields the empty structure.
inline ExecutionStructure restrict(const ExecutionStructure& s, const ObjectId& object)
{
    if (!s.objects().contains(object)) {
        throw PreconditionFailed("unknown object '" + object + "'");
    }
    std::vector<std::size_t> keep;
    std::vector<Event> events;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s.event(i).object() == object) {
            keep.push_back(i);
            events.push_back(s.event(i));
        }
    }
    return ExecutionStructure(std::move(events), s.hard().restricted(keep),
                              s.soft().restricted(keep), {object});
}

/// b refines a: same events, b's precedence within a's, a's communication
/// within b's.
inline bool refines(const ExecutionStructure& b, const ExecutionStructure& a)
{
    if (b.events() != a.events()) {
        return false;
    }
    return b.hard().subset_of(a.hard()) && a.soft().subset_of(b.soft());
}

// ---------------------------------------------------------------------------
// Histories

struct HistoryAction {
    enum class Kind { invocation, response };

    EventTag tag;
    ProcessId process;
    Kind kind = Kind::invocation;
    /// For responses only the object field is meaningful.
    Invocation invocation;
    Response response;

    const ObjectId& object() const { return invocation.object; }

    static HistoryAction invoke(EventTag tag, ProcessId p, Invocation inv)
    {
        return {std::move(tag), std::move(p), Kind::invocation, std::move(inv), {}};
    }

    static HistoryAction respond(EventTag tag, ProcessId p, ObjectId object, Response r)
    {
        return {std::move(tag), std::move(p), Kind::response, Invocation{std::move(object), {}, {}}, r};
    }
};

/// A matching pair of a history: invocation index and, if complete, the
/// index of its response.
struct Operation {
    std::size_t invocation;
    std::optional<std::size_t> response;
};

/// Invocation and response actions under a strict partial order. The
/// constructor stores the transitive closure of the given order and
/// rejects cycles.
class History {
  public:
    History() = default;

    History(std::vector<HistoryAction> actions, const Relation& order)
        : actions_(std::move(actions)), order_(order.transitive_closure())
    {
        if (order.size() != actions_.size()) {
            throw MalformedInput("history order size does not match action count");
        }
        if (!order_.irreflexive()) {
            throw MalformedInput("history order is cyclic");
        }
        for (std::size_t i = 0; i < actions_.size(); ++i) {
            if (!index_.emplace(actions_[i].tag, i).second) {
                throw MalformedInput("duplicate action tag '" + actions_[i].tag + "'");
            }
        }
    }

    static History from_tag_pairs(std::vector<HistoryAction> actions,
                                  const std::vector<TagPair>& order)
    {
        std::map<EventTag, std::size_t> idx;
        for (std::size_t i = 0; i < actions.size(); ++i) {
            idx.emplace(actions[i].tag, i);
        }
        Relation r(actions.size());
        for (const auto& [a, b] : order) {
            auto ia = idx.find(a);
            auto ib = idx.find(b);
            if (ia == idx.end() || ib == idx.end()) {
                throw MalformedInput("dangling tag in history order: (" + a + ", " + b + ")");
            }
            r.insert(ia->second, ib->second);
        }
        return History(std::move(actions), r);
    }

    /// Totally ordered history in the order given.
    static History from_sequence(std::vector<HistoryAction> actions)
    {
        Relation r(actions.size());
        for (std::size_t i = 0; i < actions.size(); ++i) {
            for (std::size_t j = i + 1; j < actions.size(); ++j) {
                r.insert(i, j);
            }
        }
        return History(std::move(actions), r);
    }

    const std::vector<HistoryAction>& actions() const { return actions_; }
    const HistoryAction& action(std::size_t i) const { return actions_[i]; }
    const Relation& order() const { return order_; }
    std::size_t size() const { return actions_.size(); }

    std::optional<std::size_t> index_of(const EventTag& tag) const
    {
        auto it = index_.find(tag);
        if (it == index_.end()) {
            return std::nullopt;
        }
        return it->second;
    }

    bool total() const
    {
        std::vector<std::size_t> all(actions_.size());
        std::iota(all.begin(), all.end(), 0);
        return order_.total_on(all);
    }

    /// The actions of one process in history order.
    std::vector<std::size_t> process_actions(const ProcessId& p) const
    {
        std::vector<std::size_t> mine;
        for (std::size_t i = 0; i < actions_.size(); ++i) {
            if (actions_[i].process == p) {
                mine.push_back(i);
            }
        }
        if (!order_.total_on(mine)) {
            throw MalformedInput("history not totally ordered on process '" + p + "'");
        }
        std::sort(mine.begin(), mine.end(),
                  [&](std::size_t a, std::size_t b) { return order_.contains(a, b); });
        return mine;
    }

    std::set<ProcessId> processes() const
    {
        std::set<ProcessId> ps;
        for (const auto& a : actions_) {
            ps.insert(a.process);
        }
        return ps;
    }

    /// mp(h), checking well-formedness: per process, invocations each
    /// followed by a matching response of the same object. Sorted by
    /// invocation tag.
    std::vector<Operation> matching_pairs() const
    {
        std::vector<Operation> ops;
        for (const auto& p : processes()) {
            std::optional<std::size_t> open;
            for (auto i : process_actions(p)) {
                const auto& a = actions_[i];
                if (a.kind == HistoryAction::Kind::invocation) {
                    if (open) {
                        throw MalformedInput("process '" + p + "' invokes '" + a.tag +
                                             "' before '" + actions_[*open].tag + "' returned");
                    }
                    open = i;
                } else {
                    if (!open) {
                        throw MalformedInput("response '" + a.tag + "' without invocation");
                    }
                    if (actions_[*open].object() != a.object()) {
                        throw MalformedInput("response '" + a.tag + "' does not match object of '" +
                                             actions_[*open].tag + "'");
                    }
                    ops.push_back({*open, i});
                    open.reset();
                }
            }
            if (open) {
                ops.push_back({*open, std::nullopt});
            }
        }
        std::sort(ops.begin(), ops.end(), [&](const Operation& a, const Operation& b) {
            return actions_[a.invocation].tag < actions_[b.invocation].tag;
        });
        return ops;
    }

    bool complete() const
    {
        auto ops = matching_pairs();
        return std::all_of(ops.begin(), ops.end(),
                           [](const Operation& o) { return o.response.has_value(); });
    }

  private:
    std::vector<HistoryAction> actions_;
    std::map<EventTag, std::size_t> index_;
    Relation order_;
};

/// exec(h): one event per matching pair (tagged by its invocation), with
/// precedence from response-before-invocation and communication from
/// invocation-before-response. The diagonal is left out of communication.
inline ExecutionStructure from_history(const History& h)
{
    auto ops = h.matching_pairs();
    std::vector<Event> events;
    for (const auto& op : ops) {
        const auto& inv = h.action(op.invocation);
        if (!op.response) {
            throw IncompleteHistory("invocation '" + inv.tag + "' has no matching response");
        }
        events.push_back(Event{inv.tag, inv.process, inv.invocation, h.action(*op.response).response});
    }
    const auto n = ops.size();
    Relation hard(n);
    Relation soft(n);
    const auto& order = h.order();
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = 0; b < n; ++b) {
            if (a == b) {
                continue;
            }
            if (order.contains(*ops[a].response, ops[b].invocation)) {
                hard.insert(a, b);
            }
            if (order.contains(ops[a].invocation, *ops[b].response)) {
                soft.insert(a, b);
            }
        }
    }
    return ExecutionStructure(std::move(events), std::move(hard), std::move(soft));
}

}  // namespace causalin
