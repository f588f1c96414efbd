#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "cct/error.hpp"
#include "cct/rational.hpp"

namespace cct {

/// Basic events are named atomic propositions. Names match
/// [A-Za-z_][A-Za-z0-9_]* and are compared case-sensitively.
using EventName = std::string;

inline bool valid_event_name(const std::string& s) {
    if (s.empty()) return false;
    auto head = [](char c) { return c == '_' || (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z'); };
    auto body = [&](char c) { return head(c) || (c >= '0' && c <= '9'); };
    if (!head(s[0])) return false;
    for (std::size_t i = 1; i < s.size(); ++i)
        if (!body(s[i])) return false;
    return true;
}

/// A conjunction of basic events, or the distinguished true event.
/// The true event is accepted only by the world-level machinery; the
/// tree engine rejects it at validation.
class ConjunctiveEvent {
public:
    static ConjunctiveEvent top() { return ConjunctiveEvent(TopTag{}); }

    explicit ConjunctiveEvent(std::vector<EventName> atoms) : atoms_(std::move(atoms)) {
        std::sort(atoms_.begin(), atoms_.end());
        atoms_.erase(std::unique(atoms_.begin(), atoms_.end()), atoms_.end());
        if (atoms_.empty()) fail(ErrorKind::BadEvent, "conjunctive event needs at least one atom");
        for (const auto& a : atoms_)
            if (!valid_event_name(a)) fail(ErrorKind::BadEvent, "bad event name: " + a);
    }
    explicit ConjunctiveEvent(EventName atom) : ConjunctiveEvent(std::vector<EventName>{std::move(atom)}) {}
    explicit ConjunctiveEvent(const char* atom) : ConjunctiveEvent(EventName(atom)) {}

    bool is_top() const { return top_; }
    const std::vector<EventName>& atoms() const { return atoms_; }
    bool single() const { return !top_ && atoms_.size() == 1; }
    bool contains(const EventName& e) const {
        return std::binary_search(atoms_.begin(), atoms_.end(), e);
    }

    std::string text() const {
        if (top_) return "*";
        std::string out;
        for (const auto& a : atoms_) {
            if (!out.empty()) out += ' ';
            out += a;
        }
        return out;
    }

    friend bool operator==(const ConjunctiveEvent& a, const ConjunctiveEvent& b) {
        return a.top_ == b.top_ && a.atoms_ == b.atoms_;
    }

private:
    struct TopTag {};
    explicit ConjunctiveEvent(TopTag) : top_(true) {}
    bool top_ = false;
    std::vector<EventName> atoms_;  // sorted, unique
};

/// (H|G)[u1,u2]: u1 * Pr(G) <= Pr(GH) <= u2 * Pr(G).
struct ConditionalConstraint {
    ConjunctiveEvent conclusion;  // H
    ConjunctiveEvent premise;     // G, may be top in oracle knowledge bases
    Rational lower;
    Rational upper;

    ConditionalConstraint(ConjunctiveEvent h, ConjunctiveEvent g, Rational u1, Rational u2)
        : conclusion(std::move(h)), premise(std::move(g)), lower(std::move(u1)), upper(std::move(u2)) {
        if (!in_unit_interval(lower) || !in_unit_interval(upper))
            fail(ErrorKind::BadInterval, "constraint endpoint outside [0,1]");
        if (lower > upper)
            fail(ErrorKind::BadInterval, "constraint with lower " + to_string(lower) +
                                             " > upper " + to_string(upper));
        if (conclusion.is_top()) fail(ErrorKind::BadEvent, "top event as conclusion");
    }

    std::string text() const {
        return "(" + conclusion.text() + " | " + premise.text() + ") [" + to_string(lower) +
               ", " + to_string(upper) + "]";
    }
};

struct KnowledgeBase {
    std::vector<EventName> events;  // sorted, unique; defines the world bit order
    std::vector<ConditionalConstraint> constraints;

    static KnowledgeBase make(std::vector<EventName> events,
                              std::vector<ConditionalConstraint> constraints) {
        KnowledgeBase kb;
        kb.events = std::move(events);
        std::sort(kb.events.begin(), kb.events.end());
        if (std::adjacent_find(kb.events.begin(), kb.events.end()) != kb.events.end())
            fail(ErrorKind::BadEvent, "duplicate event declaration");
        kb.constraints = std::move(constraints);
        std::set<std::pair<std::string, std::string>> seen;
        for (const auto& c : kb.constraints) {
            for (const auto& a : c.conclusion.atoms()) kb.require_event(a);
            if (!c.premise.is_top())
                for (const auto& a : c.premise.atoms()) kb.require_event(a);
            if (!seen.insert({c.conclusion.text(), c.premise.text()}).second)
                fail(ErrorKind::DuplicateEdge, "two constraints share (H, G): " + c.text());
        }
        return kb;
    }

    std::size_t index_of(const EventName& e) const {
        auto it = std::lower_bound(events.begin(), events.end(), e);
        if (it == events.end() || *it != e) fail(ErrorKind::UnknownEvent, "unknown event: " + e);
        return static_cast<std::size_t>(it - events.begin());
    }
    bool has_event(const EventName& e) const {
        return std::binary_search(events.begin(), events.end(), e);
    }
    void require_event(const EventName& e) const { (void)index_of(e); }
};

/// A possible world: one truth assignment over an ordered event list,
/// packed as a bit pattern (bit i = i-th event in lexicographic order).
using WorldBits = std::uint64_t;

inline constexpr std::size_t kMaxWorldEvents = 62;

inline bool world_satisfies(const std::vector<EventName>& events, WorldBits w,
                            const ConjunctiveEvent& e) {
    if (e.is_top()) return true;
    for (const auto& a : e.atoms()) {
        auto it = std::lower_bound(events.begin(), events.end(), a);
        if (it == events.end() || *it != a)
            fail(ErrorKind::DomainMismatch, "world does not cover event " + a);
        if (!((w >> (it - events.begin())) & 1u)) return false;
    }
    return true;
}

/// Sparse probabilistic interpretation: worlds with zero mass are absent,
/// stored masses are positive and sum to one exactly.
class Interpretation {
public:
    static Interpretation make(std::vector<EventName> events, std::map<WorldBits, Rational> mass) {
        Interpretation pr;
        pr.events_ = std::move(events);
        std::sort(pr.events_.begin(), pr.events_.end());
        if (pr.events_.size() > kMaxWorldEvents) fail(ErrorKind::CapExceeded, "too many events");
        Rational total = 0;
        for (auto it = mass.begin(); it != mass.end();) {
            if (it->second == 0) {
                it = mass.erase(it);
                continue;
            }
            if (it->second < 0) fail(ErrorKind::BadInterval, "negative world mass");
            total += it->second;
            ++it;
        }
        if (total != 1) fail(ErrorKind::BadInterval, "interpretation mass sums to " + to_string(total));
        pr.mass_ = std::move(mass);
        return pr;
    }

    const std::vector<EventName>& events() const { return events_; }
    const std::map<WorldBits, Rational>& mass() const { return mass_; }

    /// Pr(e): exact sum over satisfying worlds.
    Probability prob(const ConjunctiveEvent& e) const {
        Rational sum = 0;
        for (const auto& [w, m] : mass_)
            if (world_satisfies(events_, w, e)) sum += m;
        return sum;
    }

    /// Pr(g and h) for a conditional constraint's joint event.
    Probability prob_joint(const ConjunctiveEvent& g, const ConjunctiveEvent& h) const {
        Rational sum = 0;
        for (const auto& [w, m] : mass_)
            if (world_satisfies(events_, w, g) && world_satisfies(events_, w, h)) sum += m;
        return sum;
    }

private:
    std::vector<EventName> events_;
    std::map<WorldBits, Rational> mass_;
};

/// Pr |= (H|G)[u1,u2]. Holds whenever Pr(G) = 0.
inline bool check_constraint(const Interpretation& pr, const ConditionalConstraint& c) {
    Rational pg = pr.prob(c.premise);
    Rational pgh = pr.prob_joint(c.premise, c.conclusion);
    return c.lower * pg <= pgh && pgh <= c.upper * pg;
}

/// Violated constraints of kb under pr; empty iff pr is a model of kb.
inline std::vector<ConditionalConstraint> check_kb(const Interpretation& pr,
                                                   const KnowledgeBase& kb) {
    if (pr.events() != kb.events)
        fail(ErrorKind::DomainMismatch, "interpretation domain differs from knowledge base");
    std::vector<ConditionalConstraint> bad;
    for (const auto& c : kb.constraints)
        if (!check_constraint(pr, c)) bad.push_back(c);
    return bad;
}

/// A tight answer [lower, upper] plus the applied-rule trace. The
/// empty-consequence convention renders as [1, 0].
struct TightAnswer {
    Rational lower;
    Rational upper;
    bool empty_consequence = false;
    std::vector<std::string> trace;

    static TightAnswer empty() {
        TightAnswer t;
        t.lower = 1;
        t.upper = 0;
        t.empty_consequence = true;
        return t;
    }
    static TightAnswer of(Rational lo, Rational hi) {
        TightAnswer t;
        t.lower = std::move(lo);
        t.upper = std::move(hi);
        return t;
    }

    std::string text() const {
        std::string s = "[" + to_string(lower) + ", " + to_string(upper) + "]";
        if (empty_consequence) return s + " (inconsistent premise)";
        return s + "  (~[" + to_decimal(lower) + ", " + to_decimal(upper) + "])";
    }
};

}  // namespace cct
