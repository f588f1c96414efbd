#pragma once

#include <cassert>
#include <optional>
#include <string>
#include <vector>

#include "cct/tree.hpp"

namespace cct {

/// Least-upper-bound triple at a node B with child conjunction C:
/// alpha2 bounds Pr(B L(C))/Pr(B), beta2 bounds Pr(~B L(C))/Pr(B),
/// gamma2 bounds Pr(L(C))/Pr(B). beta2 and gamma2 may exceed one.
struct UpperTriple {
    Rational alpha2, beta2, gamma2;

    void check() const {
        assert(alpha2 <= gamma2);
        assert(beta2 <= gamma2);
        assert(gamma2 <= alpha2 + beta2);
    }
};

struct LowerValue {
    Rational alpha1;
    std::optional<Rational> delta1;  // defined iff alpha1 > 0
};

namespace detail {

inline Rational rat_min(const Rational& a, const Rational& b) { return a < b ? a : b; }
inline Rational rat_max(const Rational& a, const Rational& b) { return a > b ? a : b; }

}  // namespace detail

/// Greatest-lower-bound propagation over the oriented tree, one pass in
/// children-first order. Interval trees use the lower endpoints, which is
/// exact for the greatest lower bound. Returns per-node values; entry [v]
/// holds H1a(v, v^).
inline std::vector<Rational> h1_alpha_all(const OrientedTree& ot) {
    std::vector<Rational> alpha(ot.tree().size(), 1);
    for (std::size_t v : ot.order()) {
        const auto& ch = ot.children(v);
        if (ch.empty()) continue;  // LEAF: 1
        Rational acc = 1 - Rational(static_cast<long>(ch.size()));
        Rational single;
        for (std::size_t c : ch) {
            Rational u = ot.forward(c).first;   // Pr1(c|v)
            Rational w = ot.backward(c).first;  // Pr1(v|c)
            Rational chained = detail::rat_max(0, u * (1 + (alpha[c] - 1) / w));
            if (ch.size() == 1)
                single = chained;  // CHAINING
            else
                acc += chained;  // FUSION sum
        }
        alpha[v] = ch.size() == 1 ? single : detail::rat_max(0, acc);
    }
    return alpha;
}

inline Rational h1_alpha(const OrientedTree& ot, const EventName& node) {
    return h1_alpha_all(ot)[ot.tree().index_of(node)];
}

/// Least-upper-bound triples for exact trees, one children-first pass.
inline std::vector<UpperTriple> h2_triple_all(const OrientedTree& ot) {
    if (!ot.tree().exact())
        fail(ErrorKind::Precondition, "upper-bound propagation requires an exact tree");
    std::vector<UpperTriple> triple(ot.tree().size(), {1, 0, 1});
    for (std::size_t v : ot.order()) {
        const auto& ch = ot.children(v);
        if (ch.empty()) continue;  // LEAF: (1, 0, 1)
        UpperTriple fused;
        bool first = true;
        for (std::size_t c : ch) {
            Rational u = ot.forward(c).first;
            Rational w = ot.backward(c).first;
            const UpperTriple& t = triple[c];
            UpperTriple e;
            e.gamma2 = u * t.gamma2 / w;
            e.alpha2 = detail::rat_min(
                detail::rat_min(1, e.gamma2),
                detail::rat_min(1 - u * (1 - t.alpha2 / w), u * (1 + t.beta2 / w)));
            e.beta2 = detail::rat_min(u * ((t.beta2 + 1) / w - 1), e.gamma2);
            e.check();
            if (first) {
                fused = e;
                first = false;
            } else {  // FUSION, incremental min
                fused.alpha2 = detail::rat_min(fused.alpha2, e.alpha2);
                fused.beta2 = detail::rat_min(fused.beta2, e.beta2);
                fused.gamma2 = detail::rat_min(fused.gamma2, e.gamma2);
            }
        }
        if (ch.size() > 1) {
            // The pairwise alpha+beta cross term collapses to alpha2 + beta2.
            fused.gamma2 = detail::rat_min(fused.gamma2, fused.alpha2 + fused.beta2);
        }
        fused.check();
        triple[v] = fused;
    }
    return triple;
}

inline UpperTriple h2_triple(const OrientedTree& ot, const EventName& node) {
    return h2_triple_all(ot)[ot.tree().index_of(node)];
}

/// Conclusion-side greatest lower bounds H1d(v, v^): defined where the
/// corresponding H1a value is positive.
inline std::vector<std::optional<Rational>> h1_delta_all(const OrientedTree& ot,
                                                         const std::vector<Rational>& alpha) {
    std::vector<std::optional<Rational>> delta(ot.tree().size());
    for (std::size_t v : ot.order()) {
        const auto& ch = ot.children(v);
        if (ch.empty()) {
            delta[v] = Rational(1);  // LEAF
            continue;
        }
        if (alpha[v] == 0) continue;  // undefined here
        if (ch.size() == 1) {
            std::size_t c = ch[0];
            Rational w = ot.backward(c).first;  // Pr1(v|c)
            delta[v] = *delta[c] * (1 + (w - 1) / alpha[c]);
            continue;
        }
        // FUSION over the per-edge chained values.
        Rational sum = 1 - Rational(static_cast<long>(ch.size()));
        std::optional<Rational> best;
        for (std::size_t c : ch) {
            Rational u = ot.forward(c).first;
            Rational w = ot.backward(c).first;
            Rational ca = detail::rat_max(0, u * (1 + (alpha[c] - 1) / w));
            Rational cd = *delta[c] * (1 + (w - 1) / alpha[c]);
            sum += ca;
            Rational term = ca * (1 / cd - 1);
            if (!best || term < *best) best = term;
        }
        delta[v] = 1 / (1 + *best / sum);
    }
    return delta;
}

inline Rational h1_delta(const OrientedTree& ot, const EventName& node) {
    auto alpha = h1_alpha_all(ot);
    std::size_t v = ot.tree().index_of(node);
    if (alpha[v] == 0)
        fail(ErrorKind::Precondition, "delta undefined: the reverse lower bound is zero");
    return *h1_delta_all(ot, alpha)[v];
}

/// Full table traces are recorded only up to this node count; beyond it a
/// one-line summary stands in (the table walk is quadratic on chains).
inline constexpr std::size_t kTraceLimit = 512;

namespace detail {

inline std::string join(const std::vector<EventName>& names) {
    std::string s;
    for (const auto& n : names) s += n;
    return s;
}

inline std::string pad(std::string s, std::size_t width) {
    if (s.size() < width) s.append(width - s.size(), ' ');
    return s;
}

}  // namespace detail

/// One table row of a propagation run: LEAF and FUSION rows carry the
/// node's own values, CHAINING rows the per-edge values toward one child.
struct PropagationRow {
    std::size_t stratum;
    EventName node;
    std::string closure;  // the leaves below the chained child (or node)
    Rational alpha1;
    std::optional<UpperTriple> upper;  // absent for lower-only runs
    const char* rule;
};

inline std::vector<PropagationRow> propagation_rows(const OrientedTree& ot,
                                                    const std::vector<Rational>& alpha,
                                                    const std::vector<UpperTriple>* triples) {
    std::vector<PropagationRow> rows;
    for (std::size_t v : ot.order()) {
        const auto& ch = ot.children(v);
        const EventName& b = ot.name(v);
        if (ch.empty()) {
            rows.push_back({ot.stratum(v), b, b, 1,
                            triples ? std::optional<UpperTriple>({1, 0, 1}) : std::nullopt,
                            "LEAF"});
            continue;
        }
        for (std::size_t c : ch) {
            Rational u = ot.forward(c).first;
            Rational w = ot.backward(c).first;
            Rational ca = detail::rat_max(0, u * (1 + (alpha[c] - 1) / w));
            std::optional<UpperTriple> e;
            if (triples) {
                const UpperTriple& t = (*triples)[c];
                UpperTriple chained;
                chained.gamma2 = u * t.gamma2 / w;
                chained.alpha2 = detail::rat_min(
                    detail::rat_min(1, chained.gamma2),
                    detail::rat_min(1 - u * (1 - t.alpha2 / w), u * (1 + t.beta2 / w)));
                chained.beta2 = detail::rat_min(u * ((t.beta2 + 1) / w - 1), chained.gamma2);
                e = chained;
            }
            rows.push_back(
                {ot.stratum(v), b, detail::join(ot.leaves_below(c)), ca, e, "CHAINING"});
        }
        if (ch.size() > 1)
            rows.push_back({ot.stratum(v), b, detail::join(ot.leaves_below(v)), alpha[v],
                            triples ? std::optional<UpperTriple>((*triples)[v]) : std::nullopt,
                            "FUSION"});
    }
    return rows;
}

namespace detail {

/// Table-style trace of a full propagation, one line per row.
inline void trace_propagation(const OrientedTree& ot, const std::vector<Rational>& alpha,
                              const std::vector<UpperTriple>* triples,
                              std::vector<std::string>& out) {
    out.push_back("  stratum B       D           a1      a2      b2      g2      rule");
    for (const auto& r : propagation_rows(ot, alpha, triples)) {
        std::string line = pad(std::to_string(r.stratum), 3) + pad(r.node, 8) +
                           pad(r.closure, 12) + pad(to_decimal(r.alpha1), 8);
        if (r.upper) {
            line += pad(to_decimal(r.upper->alpha2), 8) + pad(to_decimal(r.upper->beta2), 8) +
                    pad(to_decimal(r.upper->gamma2), 8);
        } else {
            line += pad("-", 8) + pad("-", 8) + pad("-", 8);
        }
        line += r.rule;
        out.push_back(line);
    }
}

/// Checks that q is premise-restricted and complete on t, and that the
/// conclusion is exactly the childless set when rooting at the premise.
inline OrientedTree checked_premise_orientation(const ConstraintTree& t, const Query& q) {
    auto cl = validate_query(t, q);
    if (cl.cls != QueryClass::PremiseRestricted || !cl.complete)
        fail(ErrorKind::Classification, "query is not premise-restricted complete");
    return orient(t, q.premise.atoms()[0]);
}

}  // namespace detail

/// Tight answer to a premise-restricted complete query on an exact tree:
/// [H1a(E, E^), H2a(E, E^)] with a table-style trace.
inline TightAnswer answer_premise_restricted_exact(const ConstraintTree& t, const Query& q) {
    OrientedTree ot = detail::checked_premise_orientation(t, q);
    auto alpha = h1_alpha_all(ot);
    auto triples = h2_triple_all(ot);
    std::size_t root = ot.root();
    TightAnswer ans = TightAnswer::of(alpha[root], triples[root].alpha2);
    ans.trace.push_back("exact engine: propagation rooted at " + ot.name(root));
    if (t.size() <= kTraceLimit)
        detail::trace_propagation(ot, alpha, &triples, ans.trace);
    else
        ans.trace.push_back("trace table omitted (" + std::to_string(t.size()) + " nodes)");
    return ans;
}

/// Tight answer to a strongly conclusion-restricted complete query
/// (F|E): the upper answer is always one; the lower answer follows the
/// three-way case split on the reverse query's lower bound.
inline TightAnswer answer_strongly_conclusion_restricted(const ConstraintTree& t, const Query& q) {
    auto cl = validate_query(t, q);
    if (cl.cls != QueryClass::StronglyConclusionRestricted || !cl.complete)
        fail(ErrorKind::Classification, "query is not strongly conclusion-restricted complete");
    const EventName& f = q.conclusion.atoms()[0];
    OrientedTree ot = orient(t, f);
    auto alpha = h1_alpha_all(ot);
    std::size_t root = ot.root();

    TightAnswer ans;
    if (alpha[root] > 0) {
        auto delta = h1_delta_all(ot, alpha);
        ans = TightAnswer::of(*delta[root], 1);
        ans.trace.push_back("conclusion-restricted case (1): reverse lower bound " +
                            to_string(alpha[root]) + " > 0, answer [delta, 1]");
        if (t.size() <= kTraceLimit) detail::trace_propagation(ot, alpha, nullptr, ans.trace);
    } else if (implies_exists(t, q.premise, f)) {
        ans = TightAnswer::of(1, 1);
        ans.trace.push_back(
            "conclusion-restricted case (2): reverse lower bound 0 and E => F, answer [1, 1]");
    } else {
        ans = TightAnswer::of(0, 1);
        ans.trace.push_back("conclusion-restricted case (3): answer [0, 1]");
    }
    return ans;
}

}  // namespace cct
