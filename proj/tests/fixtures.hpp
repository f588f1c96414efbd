#pragma once

#include <random>
#include <string>
#include <vector>

#include "cct/io.hpp"
#include "cct/tree.hpp"

namespace fixtures {

/// Nine-node exact tree matching the propagation table: M-N-O with O
/// branching to Q, R, P and P branching to S, T, U.
inline const char* kKbL = R"(tree
constraint (N | M) [0.35]
constraint (M | N) [0.85]
constraint (O | N) [0.55]
constraint (N | O) [1]
constraint (Q | O) [0.95]
constraint (O | Q) [0.95]
constraint (R | O) [0.95]
constraint (O | R) [0.15]
constraint (P | O) [0.85]
constraint (O | P) [0.95]
constraint (S | P) [0.85]
constraint (P | S) [0.95]
constraint (T | P) [0.85]
constraint (P | T) [0.95]
constraint (U | P) [0.85]
constraint (P | U) [1]
)";

inline const char* kTweety = R"(kb
constraint (bird | ostrich) [1]
constraint (bird | *) [0.9, 1]
constraint (ostrich | bird) [0.8, 1]
)";

/// Star with center O: delta fusion fixture.
inline const char* kStarOQR = R"(tree
constraint (Q | O) [0.95]
constraint (O | Q) [0.95]
constraint (R | O) [0.95]
constraint (O | R) [0.15]
)";

inline cct::ConstraintTree kb_l() { return *cct::parse_kb(kKbL).tree; }
inline cct::ConstraintTree star_oqr() { return *cct::parse_kb(kStarOQR).tree; }

/// Small random rational in (0, 1]: n/d with d <= 6.
inline cct::Rational random_positive_unit(std::mt19937& rng) {
    std::uniform_int_distribution<int> den(1, 6);
    int d = den(rng);
    std::uniform_int_distribution<int> num(1, d);
    return cct::rat(num(rng), d);
}

/// Random tree over n events; exact trees carry point intervals, general
/// trees widen each interval up to a random upper bound.
inline cct::ConstraintTree random_tree(std::mt19937& rng, std::size_t n, bool exact) {
    std::vector<std::string> events;
    for (std::size_t i = 0; i < n; ++i) events.push_back("E" + std::to_string(i));
    std::vector<cct::TreeEdge> edges;
    for (std::size_t i = 1; i < n; ++i) {
        std::uniform_int_distribution<std::size_t> pick(0, i - 1);
        std::size_t p = pick(rng);
        cct::TreeEdge e;
        e.a = std::min(events[p], events[i]);
        e.b = std::max(events[p], events[i]);
        auto widen = [&](const cct::Rational& lo) -> cct::Rational {
            if (exact) return lo;
            cct::Rational gap = 1 - lo;
            std::uniform_int_distribution<int> num(0, 4);
            return cct::Rational(lo + gap * cct::rat(num(rng), 4));
        };
        e.ab_lo = random_positive_unit(rng);
        e.ab_hi = widen(e.ab_lo);
        e.ba_lo = random_positive_unit(rng);
        e.ba_hi = widen(e.ba_lo);
        edges.push_back(e);
    }
    return cct::ConstraintTree::from_edges(std::move(events), std::move(edges));
}

/// Random valid query: nonempty disjoint E, F drawn until validation
/// passes. Single-atom sides are common, so all three classes occur.
inline cct::Query random_query(std::mt19937& rng, const cct::ConstraintTree& t) {
    const auto& ev = t.events();
    for (;;) {
        std::vector<std::string> pool = ev;
        std::shuffle(pool.begin(), pool.end(), rng);
        std::uniform_int_distribution<std::size_t> esz(1, std::max<std::size_t>(1, pool.size() / 2));
        std::size_t ne = esz(rng);
        if (ne >= pool.size()) continue;
        std::uniform_int_distribution<std::size_t> fsz(1, pool.size() - ne);
        std::size_t nf = fsz(rng);
        std::vector<std::string> e(pool.begin(), pool.begin() + ne);
        std::vector<std::string> f(pool.begin() + ne, pool.begin() + ne + nf);
        try {
            cct::Query q{cct::ConjunctiveEvent(f), cct::ConjunctiveEvent(e)};
            cct::validate_query(t, q);
            return q;
        } catch (const cct::Error&) {
            continue;
        }
    }
}

inline bool three_colorable(const cct::Graph& g) {
    std::size_t n = g.vertices.size();
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    for (const auto& [a, b] : g.edges) {
        auto idx = [&](const std::string& v) {
            return std::lower_bound(g.vertices.begin(), g.vertices.end(), v) - g.vertices.begin();
        };
        edges.push_back({static_cast<std::size_t>(idx(a)), static_cast<std::size_t>(idx(b))});
    }
    std::vector<int> color(n, 0);
    std::size_t total = 1;
    for (std::size_t i = 0; i < n; ++i) total *= 3;
    for (std::size_t code = 0; code < total; ++code) {
        std::size_t c = code;
        for (std::size_t i = 0; i < n; ++i) {
            color[i] = static_cast<int>(c % 3);
            c /= 3;
        }
        bool ok = true;
        for (const auto& [a, b] : edges)
            if (color[a] == color[b]) ok = false;
        if (ok) return true;
    }
    return n == 0;
}

}  // namespace fixtures
