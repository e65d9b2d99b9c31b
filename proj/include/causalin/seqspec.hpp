#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "causalin/errors.hpp"
#include "causalin/exstruct.hpp"
#include "causalin/label.hpp"

namespace causalin {

/// Abstract state of one object. Stacks keep their contents top first;
/// a register keeps its single value.
using ObjectState = std::vector<Value>;

/// Operational form (Γ, init, τ) of one object. τ is partial: an empty
/// result means no enabled transition.
struct OperationalObject {
    using Transition = std::function<std::optional<std::pair<ObjectState, Response>>(
        const ObjectState&, const Invocation&)>;

    ObjectId object;
    ObjectState init;
    Transition tau;

    /// τ(s, h, i): the new state and h extended by the (i, r) pair.
    std::optional<std::pair<ObjectState, LabelSequence>> step(const ObjectState& state,
                                                              LabelSequence history,
                                                              const Invocation& inv) const
    {
        if (inv.object != object) {
            throw ForeignLabel("invocation " + to_string(inv) + " is not on object '" + object + "'");
        }
        auto r = tau(state, inv);
        if (!r) {
            return std::nullopt;
        }
        history.push_back(Label{inv, r->second});
        return std::pair{std::move(r->first), std::move(history)};
    }
};

enum class StackVariant { blocking, returns_empty };

inline OperationalObject operational_stack(const ObjectId& object, StackVariant variant)
{
    return {object, {}, [variant](const ObjectState& s, const Invocation& inv)
                -> std::optional<std::pair<ObjectState, Response>> {
                if (inv.method == "push" && inv.argument) {
                    ObjectState next{*inv.argument};
                    next.insert(next.end(), s.begin(), s.end());
                    return std::pair{std::move(next), Response::bottom()};
                }
                if (inv.method == "pop" && !inv.argument) {
                    if (s.empty()) {
                        if (variant == StackVariant::returns_empty) {
                            return std::pair{s, Response::empty()};
                        }
                        return std::nullopt;
                    }
                    return std::pair{ObjectState(s.begin() + 1, s.end()), Response::of(s.front())};
                }
                throw ForeignLabel("stack has no operation " + to_string(inv));
            }};
}

/// A read/write register holding 0 initially.
inline OperationalObject operational_register(const ObjectId& object)
{
    return {object, {0}, [](const ObjectState& s, const Invocation& inv)
                -> std::optional<std::pair<ObjectState, Response>> {
                if (inv.method == "write" && inv.argument) {
                    return std::pair{ObjectState{*inv.argument}, Response::bottom()};
                }
                if (inv.method == "read" && !inv.argument) {
                    return std::pair{s, Response::of(s.front())};
                }
                throw ForeignLabel("register has no operation " + to_string(inv));
            }};
}

/// One member of an object family: operational semantics, finite alphabet
/// and, where known, an analytic conflict table.
struct ObjectSpec {
    std::string kind;
    OperationalObject operational;
    std::vector<Label> alphabet;
    std::function<bool(const Label&, const Label&)> analytic_conflict;
};

class SequentialObject;

struct ConflictVerdict {
    enum class Status { certified, commutes_up_to_bound };

    Status status = Status::commutes_up_to_bound;
    LabelSequence k1;
    LabelSequence k2;
    std::size_t bound = 0;

    bool certified() const { return status == Status::certified; }
};

/// A sequential object over a family of disjoint objects. A single object
/// is a family of one. Legality is per-object projection legality, computed
/// by replaying τ from init.
class SequentialObject {
  public:
    using State = std::map<ObjectId, ObjectState>;

    SequentialObject() = default;

    explicit SequentialObject(ObjectSpec part)
    {
        auto id = part.operational.object;
        std::sort(part.alphabet.begin(), part.alphabet.end());
        parts_.emplace(std::move(id), std::move(part));
    }

    const std::map<ObjectId, ObjectSpec>& parts() const { return parts_; }

    std::set<ObjectId> objects() const
    {
        std::set<ObjectId> out;
        for (const auto& [id, _] : parts_) {
            out.insert(id);
        }
        return out;
    }

    const ObjectSpec& part(const ObjectId& object) const
    {
        auto it = parts_.find(object);
        if (it == parts_.end()) {
            throw ForeignLabel("no object '" + object + "' in specification");
        }
        return it->second;
    }

    /// The alphabet, grouped by object in id order and sorted within.
    std::vector<Label> alphabet() const
    {
        std::vector<Label> out;
        for (const auto& [_, p] : parts_) {
            out.insert(out.end(), p.alphabet.begin(), p.alphabet.end());
        }
        return out;
    }

    bool in_alphabet(const Label& l) const
    {
        auto it = parts_.find(l.object());
        if (it == parts_.end()) {
            return false;
        }
        return std::binary_search(it->second.alphabet.begin(), it->second.alphabet.end(), l);
    }

    /// Labels of the alphabet whose invocation is `inv`, in alphabet order.
    std::vector<Label> completions(const Invocation& inv) const
    {
        std::vector<Label> out;
        auto it = parts_.find(inv.object);
        if (it == parts_.end()) {
            return out;
        }
        for (const auto& l : it->second.alphabet) {
            if (l.invocation == inv) {
                out.push_back(l);
            }
        }
        return out;
    }

    State initial() const
    {
        State s;
        for (const auto& [id, p] : parts_) {
            s.emplace(id, p.operational.init);
        }
        return s;
    }

    /// One legal step, or nothing if the label is not enabled in `state`.
    std::optional<State> advance(State state, const Label& l) const
    {
        if (!in_alphabet(l)) {
            throw ForeignLabel("label " + to_string(l) + " is not in the alphabet");
        }
        const auto& op = parts_.at(l.object()).operational;
        auto r = op.tau(state.at(l.object()), l.invocation);
        if (!r || r->second != l.response) {
            return std::nullopt;
        }
        state[l.object()] = std::move(r->first);
        return state;
    }

    bool legal(const LabelSequence& k) const
    {
        auto s = initial();
        for (const auto& l : k) {
            auto next = advance(std::move(s), l);
            if (!next) {
                return false;
            }
            s = std::move(*next);
        }
        return true;
    }

    /// a # b. Labels of distinct objects never conflict. Uses the analytic
    /// table when the object has one, else the bounded search at bound 2.
    bool conflict(const Label& a, const Label& b) const;

  private:
    friend SequentialObject compose(const std::vector<SequentialObject>& family);

    std::map<ObjectId, ObjectSpec> parts_;
};

/// Composes a family; object ids (and hence alphabets) must be disjoint.
inline SequentialObject compose(const std::vector<SequentialObject>& family)
{
    SequentialObject out;
    for (const auto& member : family) {
        for (const auto& [id, p] : member.parts_) {
            if (!out.parts_.emplace(id, p).second) {
                throw PreconditionFailed("object '" + id + "' occurs twice in the family");
            }
        }
    }
    return out;
}

/// Bounded search for a context showing that a and b do not commute:
/// legal k1 (|k1| <= bound) and k2 (|k2| <= bound) such that exactly one
/// of k1·a·b·k2 and k1·b·a·k2 is legal. A negative answer only means no
/// witness exists within the bound.
inline ConflictVerdict conflicts(const SequentialObject& spec, const Label& a, const Label& b,
                                 std::size_t bound)
{
    using State = SequentialObject::State;
    ConflictVerdict verdict;
    verdict.bound = bound;
    if (!spec.in_alphabet(a) || !spec.in_alphabet(b)) {
        throw ForeignLabel("conflict query outside the alphabet: " + to_string(a) + ", " +
                           to_string(b));
    }
    if (a.object() != b.object()) {
        return verdict;
    }
    const auto& sigma = spec.part(a.object()).alphabet;

    auto run2 = [&](const State& s, const Label& x, const Label& y) -> std::optional<State> {
        auto t = spec.advance(s, x);
        if (!t) {
            return std::nullopt;
        }
        return spec.advance(*t, y);
    };

    // Looks for a suffix (|k2| <= bound) enabled after exactly one order.
    std::function<bool(const State&, const State&, LabelSequence&)> discriminate =
        [&](const State& sab, const State& sba, LabelSequence& k2) {
            if (sab == sba || k2.size() >= bound) {
                return false;
            }
            for (const auto& l : sigma) {
                auto na = spec.advance(sab, l);
                auto nb = spec.advance(sba, l);
                k2.push_back(l);
                if (na.has_value() != nb.has_value() || (na && discriminate(*na, *nb, k2))) {
                    return true;
                }
                k2.pop_back();
            }
            return false;
        };

    std::function<bool(const State&, LabelSequence&)> search = [&](const State& s,
                                                                    LabelSequence& k1) {
        auto sab = run2(s, a, b);
        auto sba = run2(s, b, a);
        if (sab.has_value() != sba.has_value()) {
            verdict.k1 = k1;
            return true;
        }
        if (sab) {
            LabelSequence k2;
            if (discriminate(*sab, *sba, k2)) {
                verdict.k1 = k1;
                verdict.k2 = k2;
                return true;
            }
        }
        if (k1.size() >= bound) {
            return false;
        }
        for (const auto& l : sigma) {
            if (auto t = spec.advance(s, l)) {
                k1.push_back(l);
                if (search(*t, k1)) {
                    return true;
                }
                k1.pop_back();
            }
        }
        return false;
    };

    LabelSequence k1;
    if (search(spec.initial(), k1)) {
        verdict.status = ConflictVerdict::Status::certified;
    }
    return verdict;
}

inline bool SequentialObject::conflict(const Label& a, const Label& b) const
{
    if (a.object() != b.object()) {
        return false;
    }
    const auto& p = part(a.object());
    if (p.analytic_conflict) {
        return p.analytic_conflict(a, b);
    }
    return conflicts(*this, a, b, 2).certified();
}

// ---------------------------------------------------------------------------
// Shipped objects

inline SequentialObject stack(const ObjectId& object, StackVariant variant,
                              const ValueDomain& domain)
{
    ObjectSpec p;
    p.kind = variant == StackVariant::blocking ? "stack-blocking" : "stack-empty";
    p.operational = operational_stack(object, variant);
    for (auto v : domain) {
        p.alphabet.push_back({{object, "push", v}, Response::bottom()});
        p.alphabet.push_back({{object, "pop", std::nullopt}, Response::of(v)});
    }
    if (variant == StackVariant::returns_empty) {
        p.alphabet.push_back({{object, "pop", std::nullopt}, Response::empty()});
    }
    p.analytic_conflict = [](const Label& a, const Label& b) { return a != b; };
    return SequentialObject(std::move(p));
}

inline SequentialObject register_object(const ObjectId& object, const ValueDomain& domain)
{
    ObjectSpec p;
    p.kind = "register";
    p.operational = operational_register(object);
    auto reads = merge_domains(domain, {0});
    for (auto v : domain) {
        p.alphabet.push_back({{object, "write", v}, Response::bottom()});
    }
    for (auto v : reads) {
        p.alphabet.push_back({{object, "read", std::nullopt}, Response::of(v)});
    }
    p.analytic_conflict = [](const Label& a, const Label& b) {
        bool wa = a.invocation.method == "write";
        bool wb = b.invocation.method == "write";
        if (wa && wb) {
            return a.invocation.argument != b.invocation.argument;
        }
        return wa != wb;
    };
    return SequentialObject(std::move(p));
}

/// A sequential object from an operational one: alphabet is every (i, r)
/// reachable by τ from any state reachable within `depth` steps over the
/// given invocations. No analytic conflict table.
inline SequentialObject from_operational(const OperationalObject& op,
                                         const std::vector<Invocation>& invocations,
                                         std::size_t depth, std::string kind = "operational")
{
    ObjectSpec p;
    p.kind = std::move(kind);
    p.operational = op;
    std::set<Label> sigma;
    std::set<ObjectState> frontier{op.init};
    std::set<ObjectState> seen = frontier;
    for (std::size_t d = 0; d <= depth && !frontier.empty(); ++d) {
        std::set<ObjectState> next;
        for (const auto& s : frontier) {
            for (const auto& inv : invocations) {
                if (auto r = op.tau(s, inv)) {
                    sigma.insert(Label{inv, r->second});
                    if (seen.insert(r->first).second) {
                        next.insert(r->first);
                    }
                }
            }
        }
        frontier = std::move(next);
    }
    p.alphabet.assign(sigma.begin(), sigma.end());
    return SequentialObject(std::move(p));
}

inline const std::vector<std::string>& spec_names()
{
    static const std::vector<std::string> names{"stack-blocking", "stack-empty", "register"};
    return names;
}

/// The family giving every listed object the named kind.
inline SequentialObject spec_by_name(const std::string& name, const std::set<ObjectId>& objects,
                                     const ValueDomain& domain)
{
    std::vector<SequentialObject> family;
    for (const auto& x : objects) {
        if (name == "stack-blocking") {
            family.push_back(stack(x, StackVariant::blocking, domain));
        } else if (name == "stack-empty") {
            family.push_back(stack(x, StackVariant::returns_empty, domain));
        } else if (name == "register") {
            family.push_back(register_object(x, domain));
        } else {
            std::string valid;
            for (const auto& n : spec_names()) {
                valid += (valid.empty() ? "" : ", ") + n;
            }
            throw PreconditionFailed("unknown spec '" + name + "' (valid: " + valid + ")");
        }
    }
    return compose(family);
}

// ---------------------------------------------------------------------------
// Orders on event sequences

namespace detail {

inline void require_distinct_tags(const std::vector<Event>& k)
{
    std::set<EventTag> seen;
    for (const auto& e : k) {
        if (!seen.insert(e.tag).second) {
            throw MalformedInput("duplicate tag '" + e.tag + "' in sequence");
        }
    }
}

}  // namespace detail

/// ⟹_k: the strict total order of positions in k.
inline std::vector<TagPair> temporal_order(const std::vector<Event>& k)
{
    detail::require_distinct_tags(k);
    std::vector<TagPair> out;
    for (std::size_t i = 0; i < k.size(); ++i) {
        for (std::size_t j = i + 1; j < k.size(); ++j) {
            out.emplace_back(k[i].tag, k[j].tag);
        }
    }
    return out;
}

/// ≺_k: the temporal order restricted to conflicting labels.
inline std::vector<TagPair> causal_order(const SequentialObject& spec, const std::vector<Event>& k)
{
    detail::require_distinct_tags(k);
    std::vector<TagPair> out;
    for (std::size_t i = 0; i < k.size(); ++i) {
        for (std::size_t j = i + 1; j < k.size(); ++j) {
            if (spec.conflict(k[i].label(), k[j].label())) {
                out.emplace_back(k[i].tag, k[j].tag);
            }
        }
    }
    return out;
}

inline LabelSequence labels_of(const std::vector<Event>& k)
{
    LabelSequence out;
    for (const auto& e : k) {
        out.push_back(e.label());
    }
    return out;
}

}  // namespace causalin
