#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "cct/model.hpp"
#include "cct/simplex.hpp"
#include "cct/tree.hpp"

namespace cct {

struct OracleLimits {
    std::size_t max_events = 20;        // refuse larger world sets outright
    std::size_t exact_world_cap = 4096; // beyond this, solve in floating point
};

/// Set when a bound was computed with the floating-point solver rather
/// than exact rationals.
struct OracleAnswer {
    TightAnswer answer;
    bool approximate = false;
};

namespace detail {

/// Enumerated satisfying-world index sets for a conjunctive event.
inline std::vector<std::size_t> satisfying_worlds(const std::vector<EventName>& events,
                                                  const ConjunctiveEvent& e) {
    const std::size_t n = events.size();
    WorldBits mask = 0;
    if (!e.is_top()) {
        for (const auto& a : e.atoms()) {
            auto it = std::lower_bound(events.begin(), events.end(), a);
            if (it == events.end() || *it != a)
                fail(ErrorKind::DomainMismatch, "event outside domain: " + a);
            mask |= WorldBits{1} << (it - events.begin());
        }
    }
    std::vector<std::size_t> out;
    for (WorldBits w = 0; w < (WorldBits{1} << n); ++w)
        if ((w & mask) == mask) out.push_back(static_cast<std::size_t>(w));
    return out;
}

template <class T>
T from_rational(const Rational& q) {
    if constexpr (std::is_same_v<T, Rational>)
        return q;
    else
        return q.get_d();
}

/// The classical program: one nonnegative variable per atomic event,
/// premise mass pinned to one, two rows per conditional constraint.
template <class T>
LinearProgramT<T> classical_lp(const KnowledgeBase& kb, const Query& q, bool maximize) {
    const std::size_t n = kb.events.size();
    LinearProgramT<T> lp;
    for (WorldBits w = 0; w < (WorldBits{1} << n); ++w)
        lp.add_var("x_" + std::to_string(static_cast<unsigned long long>(w)));

    std::map<std::size_t, T> norm;
    for (std::size_t w : satisfying_worlds(kb.events, q.premise)) norm[w] = T(1);
    lp.add_row(std::move(norm), Relation::Equal, T(1));

    for (const auto& c : kb.constraints) {
        auto g = satisfying_worlds(kb.events, c.premise);
        std::vector<std::size_t> gh;
        for (std::size_t w : g)
            if (world_satisfies(kb.events, static_cast<WorldBits>(w), c.conclusion))
                gh.push_back(w);
        // sum(GH) - u * sum(G) >= 0 (lower), <= 0 (upper)
        std::map<std::size_t, T> lo, hi;
        for (std::size_t w : gh) {
            lo[w] += T(1);
            hi[w] += T(1);
        }
        for (std::size_t w : g) {
            lo[w] -= from_rational<T>(c.lower);
            hi[w] -= from_rational<T>(c.upper);
        }
        lp.add_row(std::move(lo), Relation::GreaterEq, T(0));
        lp.add_row(std::move(hi), Relation::LessEq, T(0));
    }

    for (std::size_t w : satisfying_worlds(kb.events, q.premise))
        if (world_satisfies(kb.events, static_cast<WorldBits>(w), q.conclusion))
            lp.objective[w] = T(1);
    lp.maximize = maximize;
    return lp;
}

}  // namespace detail

/// Builds the atomic-event linear program of the classical approach:
/// 2^n variables, 4|KB|/... two inequalities per constraint plus the
/// premise normalization.
inline LinearProgram build_classical_lp(const KnowledgeBase& kb, const Query& q, bool maximize,
                                        const OracleLimits& limits = {}) {
    if (kb.events.size() > limits.max_events)
        fail(ErrorKind::CapExceeded, "knowledge base exceeds the oracle world cap");
    return detail::classical_lp<Rational>(kb, q, maximize);
}

/// Ground-truth tight answer by brute-force linear programming over all
/// atomic events. Falls back to floating point above the exact world cap.
inline OracleAnswer oracle_answer(const KnowledgeBase& kb, const Query& q,
                                  const OracleLimits& limits = {}) {
    if (kb.events.size() > limits.max_events)
        fail(ErrorKind::CapExceeded, "knowledge base exceeds the oracle world cap");
    const bool exact = (WorldBits{1} << kb.events.size()) <= limits.exact_world_cap;
    OracleAnswer out;
    if (exact) {
        auto lo = solve_lp(detail::classical_lp<Rational>(kb, q, false));
        if (lo.status == LpStatus::Infeasible) {
            out.answer = TightAnswer::empty();
            out.answer.trace.push_back("oracle: no model gives the premise positive probability");
            return out;
        }
        auto hi = solve_lp(detail::classical_lp<Rational>(kb, q, true));
        out.answer = TightAnswer::of(lo.value, hi.value);
    } else {
        auto lo = solve_lp(detail::classical_lp<double>(kb, q, false));
        if (lo.status == LpStatus::Infeasible) {
            out.answer = TightAnswer::empty();
            out.answer.trace.push_back("oracle: no model gives the premise positive probability");
            out.approximate = true;
            return out;
        }
        auto hi = solve_lp(detail::classical_lp<double>(kb, q, true));
        Rational l(lo.value), h(hi.value);
        out.answer = TightAnswer::of(l, h);
        out.approximate = true;
    }
    out.answer.trace.push_back("oracle: solved two linear programs over " +
                               std::to_string(1ull << kb.events.size()) + " atomic events");
    return out;
}

/// Satisfiability of an arbitrary knowledge base over basic events by a
/// nondegenerate model, one giving some basic event positive probability.
/// The all-false point mass vacuously satisfies every knowledge base
/// without top premises, so plain feasibility would be trivially true;
/// the 3-colorability reduction is exact under this notion (a coloring
/// model must give the base event positive mass).
inline bool satisfiable(const KnowledgeBase& kb, const OracleLimits& limits = {}) {
    if (kb.events.size() > limits.max_events)
        fail(ErrorKind::CapExceeded, "knowledge base exceeds the oracle world cap");
    if (kb.events.empty()) return true;
    Query top_query(ConjunctiveEvent(kb.events.front()), ConjunctiveEvent::top());
    const bool exact = (WorldBits{1} << kb.events.size()) <= limits.exact_world_cap;
    // maximize the mass off the all-false world under total mass one
    if (exact) {
        auto lp = detail::classical_lp<Rational>(kb, top_query, true);
        lp.objective.clear();
        for (WorldBits w = 1; w < (WorldBits{1} << kb.events.size()); ++w)
            lp.objective[static_cast<std::size_t>(w)] = 1;
        auto out = solve_lp(lp);
        return out.status == LpStatus::Optimal && out.value > 0;
    }
    auto lp = detail::classical_lp<double>(kb, top_query, true);
    lp.objective.clear();
    for (WorldBits w = 1; w < (WorldBits{1} << kb.events.size()); ++w)
        lp.objective[static_cast<std::size_t>(w)] = 1.0;
    auto out = solve_lp(lp);
    return out.status == LpStatus::Optimal && out.value > 1e-6;
}

/// s-rescaling of a model: every world mass shrinks by the factor s and
/// the all-false world absorbs the difference (a model for any s in [0,1]).
inline Interpretation rescale_model(const Interpretation& pr, const Rational& s) {
    if (!in_unit_interval(s)) fail(ErrorKind::BadInterval, "scale outside [0,1]");
    std::map<WorldBits, Rational> mass;
    for (const auto& [w, m] : pr.mass()) mass[w] = s * m;
    mass[0] += 1 - s;
    return Interpretation::make(pr.events(), std::move(mass));
}

/// Constructive satisfiability for conditional constraint trees: a model
/// in which the conjunction of all basic events has positive probability.
/// Follows the inductive edge-attachment construction with lower interval
/// endpoints as exact values.
inline Interpretation construct_positive_model(const ConstraintTree& t,
                                               const OracleLimits& limits = {}) {
    if (t.size() > limits.max_events)
        fail(ErrorKind::CapExceeded, "tree exceeds the oracle model cap");

    // Grow the model event by event along the tree, keeping the invariant
    // that `model` is a positive model of the processed subtree.
    std::vector<EventName> done{t.events()[0]};
    std::map<WorldBits, Rational> mass{{1, 1}};  // point mass on the first event
    std::set<std::size_t> visited{0};

    // BFS over edges from node 0.
    std::vector<std::pair<std::size_t, std::size_t>> attach_order;
    std::vector<std::size_t> queue{0};
    while (!queue.empty()) {
        std::size_t v = queue.back();
        queue.pop_back();
        for (std::size_t w : t.neighbors(v))
            if (!visited.count(w)) {
                visited.insert(w);
                attach_order.push_back({v, w});
                queue.push_back(w);
            }
    }

    for (auto [c_idx, b_idx] : attach_order) {
        const EventName& c_name = t.events()[c_idx];  // shared node, already in model
        const EventName& b_name = t.events()[b_idx];  // new node
        Rational u = t.interval(b_idx, c_idx).first;  // Pr1(c|b)
        Rational v = t.interval(c_idx, b_idx).first;  // Pr1(b|c)

        // Two-node model of the edge pair with C at bit 1, B at bit 0:
        // (not-B not-C, B not-C, not-B C, B C) -> (uv, v-uv, u-uv, uv)/(u+v).
        Rational den = u + v;
        std::map<WorldBits, Rational> pair_mass;
        auto put = [&](WorldBits w, Rational m) {
            if (m != 0) pair_mass[w] = m;
        };
        put(0b00, u * v / den);
        put(0b01, (v - u * v) / den);
        put(0b10, (u - u * v) / den);
        put(0b11, u * v / den);

        // Equalize the shared-node marginal by rescaling the larger side.
        Rational pair_c = 0, model_c = 0;
        for (const auto& [w, m] : pair_mass)
            if (w & 0b10) pair_c += m;
        std::size_t c_bit = static_cast<std::size_t>(
            std::lower_bound(done.begin(), done.end(), c_name) - done.begin());
        for (const auto& [w, m] : mass)
            if ((w >> c_bit) & 1) model_c += m;
        Rational target = std::min(pair_c, model_c);
        auto rescale = [](std::map<WorldBits, Rational>& mm, const Rational& s) {
            for (auto& [w, m] : mm) m = s * m;
            mm[0] += 1 - s;
            for (auto it = mm.begin(); it != mm.end();)
                it = (it->second == 0) ? mm.erase(it) : std::next(it);
        };
        if (pair_c > target) rescale(pair_mass, target / pair_c);
        if (model_c > target) rescale(mass, target / model_c);

        // Combine: Pr(Ab Ac A2) = Pr_pair(Ab Ac) * Pr_model(Ac A2) / Pr_model(Ac).
        Rational model_c_pos = target;                 // mass of worlds with C true
        Rational model_c_neg = 1 - target;             // with C false
        std::vector<EventName> grown = done;
        grown.insert(std::lower_bound(grown.begin(), grown.end(), b_name), b_name);
        std::size_t b_bit = static_cast<std::size_t>(
            std::lower_bound(grown.begin(), grown.end(), b_name) - grown.begin());

        auto widen = [&](WorldBits w) {  // old model bits -> grown bits with B false
            WorldBits low = w & ((WorldBits{1} << b_bit) - 1);
            WorldBits high = (w >> b_bit) << (b_bit + 1);
            return low | high;
        };
        std::map<WorldBits, Rational> grown_mass;
        for (const auto& [w, m] : mass) {
            bool c_true = (w >> c_bit) & 1;
            Rational denom = c_true ? model_c_pos : model_c_neg;
            if (denom == 0) continue;  // no pair mass can sit on this side either
            for (int b_true = 0; b_true < 2; ++b_true) {
                WorldBits pw = (b_true ? 0b01 : 0b00) | (c_true ? 0b10 : 0b00);
                auto it = pair_mass.find(pw);
                if (it == pair_mass.end()) continue;
                Rational piece = it->second * m / denom;
                if (piece == 0) continue;
                WorldBits gw = widen(w) | (b_true ? (WorldBits{1} << b_bit) : 0);
                grown_mass[gw] += piece;
            }
        }
        done = std::move(grown);
        mass = std::move(grown_mass);
    }

    return Interpretation::make(done, std::move(mass));
}

/// Finite undirected graph for the 3-colorability encoding.
struct Graph {
    std::vector<std::string> vertices;
    std::vector<std::pair<std::string, std::string>> edges;

    static Graph make(std::vector<std::string> vertices,
                      std::vector<std::pair<std::string, std::string>> edges) {
        Graph g{std::move(vertices), std::move(edges)};
        std::sort(g.vertices.begin(), g.vertices.end());
        if (std::adjacent_find(g.vertices.begin(), g.vertices.end()) != g.vertices.end())
            fail(ErrorKind::BadEvent, "duplicate vertex");
        for (const auto& [a, b] : g.edges) {
            if (a == b) fail(ErrorKind::BadEvent, "self-loop on " + a);
            if (!std::binary_search(g.vertices.begin(), g.vertices.end(), a) ||
                !std::binary_search(g.vertices.begin(), g.vertices.end(), b))
                fail(ErrorKind::UnknownEvent, "edge references undeclared vertex");
        }
        return g;
    }
};

/// Reduction from graph 3-colorability: the resulting knowledge base is
/// satisfiable iff the graph is 3-colorable.
inline KnowledgeBase encode_3col(const Graph& g) {
    std::vector<EventName> events{"B"};
    std::vector<ConditionalConstraint> cs;
    auto color_event = [](const std::string& v, int i) {
        return EventName("B_" + v + "_" + std::to_string(i));
    };
    for (const auto& v : g.vertices)
        for (int i = 1; i <= 3; ++i) events.push_back(color_event(v, i));

    ConjunctiveEvent b((EventName("B")));
    for (const auto& v : g.vertices) {
        for (int i = 1; i <= 3; ++i) {
            ConjunctiveEvent bvi(color_event(v, i));
            cs.emplace_back(b, bvi, 1, 1);
            cs.emplace_back(bvi, b, rat(1, 3), rat(1, 3));
        }
        for (int i = 1; i <= 3; ++i)
            for (int j = i + 1; j <= 3; ++j)
                cs.emplace_back(ConjunctiveEvent(color_event(v, j)),
                                ConjunctiveEvent(color_event(v, i)), 0, 0);
    }
    for (const auto& [u, v] : g.edges)
        for (int i = 1; i <= 3; ++i)
            cs.emplace_back(ConjunctiveEvent(color_event(v, i)),
                            ConjunctiveEvent(color_event(u, i)), 0, 0);
    return KnowledgeBase::make(std::move(events), std::move(cs));
}

}  // namespace cct
