#pragma once

#include <cassert>
#include <string>
#include <utility>
#include <vector>

#include "cct/lp_engine.hpp"
#include "cct/propagation.hpp"
#include "cct/tree.hpp"

namespace cct {

struct PlanStep {
    enum Kind { Reduce, PremiseRestricted, ConclusionRestricted, Split } kind;
    std::string detail;
};

struct Plan {
    std::vector<PlanStep> steps;
};

struct PlannedAnswer {
    TightAnswer answer;
    Plan plan;
};

/// Closed-form tight answer for the split of an exact tree at G, from the
/// premise-side answer [u1,u2], the conclusion-side reverse lower bound
/// v1, and the conclusion-subtree values s1 = H1a(G,G^), s2 = H2a(G,G^),
/// t2 = H2g(G,G^). Requires u1 > 0.
inline std::pair<Rational, Rational> closed_form_split_exact(const Rational& u1,
                                                             const Rational& v1,
                                                             const Rational& s1,
                                                             const Rational& s2,
                                                             const Rational& t2) {
    if (u1 <= 0) fail(ErrorKind::Precondition, "closed form needs a positive premise-side lower bound");
    assert(t2 - s2 + u1 > 0);
    Rational lo = detail::rat_max(0, v1 - v1 / u1 + v1 * s1 / u1);
    Rational hi = detail::rat_min(
        detail::rat_min(1, 1 - v1 + v1 * s2 / u1), t2 / (t2 - s2 + u1));
    return {lo, hi};
}

namespace detail {

inline TightAnswer answer_premise_restricted(const ConstraintTree& t, const Query& q,
                                             Plan& plan) {
    if (t.exact()) {
        plan.steps.push_back({PlanStep::PremiseRestricted, "exact engine for " + q.text()});
        return answer_premise_restricted_exact(t, q);
    }
    plan.steps.push_back({PlanStep::PremiseRestricted, "general engine for " + q.text()});
    return answer_premise_restricted_general(t, q);
}

inline EventName fresh_name(const ConstraintTree& t, std::string base) {
    while (t.has_event(base)) base += "_";
    return base;
}

/// Answer by splitting: computes the premise-side answers at G, then
/// either the exact closed form or the synthetic-edge tree.
inline TightAnswer answer_by_split(const ConstraintTree& t, const Query& q, Plan& plan) {
    Split sp = split_at_articulation(t, q);
    plan.steps.push_back({PlanStep::Split, "split at " + sp.at});

    Query toward_g(ConjunctiveEvent(sp.at), q.premise);       // (G|E) on the left
    Query from_g(q.premise, ConjunctiveEvent(sp.at));         // (E|G) on the left
    TightAnswer u = answer_premise_restricted(sp.left, from_g, plan);
    TightAnswer v = answer_strongly_conclusion_restricted(sp.left, toward_g);
    plan.steps.push_back({PlanStep::ConclusionRestricted,
                          "premise side: (E|G) = " + u.text() + ", (G|E) = " + v.text()});

    if (u.lower > 0) {
        assert(v.lower > 0);
        if (t.exact()) {
            OrientedTree right = orient(sp.right, sp.at);
            auto alpha = h1_alpha_all(right);
            auto triples = h2_triple_all(right);
            std::size_t g = right.root();
            auto [lo, hi] = closed_form_split_exact(u.lower, v.lower, alpha[g],
                                                    triples[g].alpha2, triples[g].gamma2);
            TightAnswer ans = TightAnswer::of(lo, hi);
            ans.trace = std::move(u.trace);
            ans.trace.push_back("split case (1), exact closed form at " + sp.at);
            return ans;
        }
        // General trees: extend the conclusion side by a synthetic edge
        // carrying the premise-side answers, then answer (F|B) there.
        EventName b = fresh_name(t, sp.at + "__split");
        std::vector<EventName> events = sp.right.events();
        events.push_back(b);
        std::vector<TreeEdge> edges = sp.right.edges();
        TreeEdge e;
        e.a = std::min(b, sp.at);
        e.b = std::max(b, sp.at);
        if (e.a == b) {  // (B|G) is the a->b direction iff G == e.a
            e.ab_lo = v.lower, e.ab_hi = v.upper;  // (B←...) careful below
            e.ba_lo = u.lower, e.ba_hi = u.upper;
        } else {
            e.ab_lo = u.lower, e.ab_hi = u.upper;
            e.ba_lo = v.lower, e.ba_hi = v.upper;
        }
        edges.push_back(e);
        ConstraintTree synth = ConstraintTree::from_edges(std::move(events), std::move(edges));
        Query residual(q.conclusion, ConjunctiveEvent(b));
        TightAnswer ans = answer_premise_restricted(synth, residual, plan);
        ans.trace.push_back("split case (1), synthetic edge (" + b + "|" + sp.at + ")[" +
                            to_string(u.lower) + ", " + to_string(u.upper) + "], (" + sp.at +
                            "|" + b + ")[" + to_string(v.lower) + ", " + to_string(v.upper) + "]");
        return ans;
    }
    if (u.lower == 0 && v.lower == 1 && implies_all(t, sp.at, q.conclusion)) {
        TightAnswer ans = TightAnswer::of(1, 1);
        ans.trace.push_back("split case (2): reverse bound 0, certain articulation, G => F");
        return ans;
    }
    TightAnswer ans = TightAnswer::of(0, 1);
    ans.trace.push_back("split case (3): answer [0, 1]");
    return ans;
}

}  // namespace detail

/// Full pipeline: validate, reduce to a complete query, then dispatch to
/// the premise-restricted engines, the conclusion-restricted case split,
/// or the articulation split.
inline PlannedAnswer answer_full(const ConstraintTree& t, const Query& q) {
    PlannedAnswer out;
    auto dispatch = [&out](const ConstraintTree& tree, const Query& query,
                           QueryClassification cl) {
        switch (cl.cls) {
            case QueryClass::PremiseRestricted:
                return detail::answer_premise_restricted(tree, query, out.plan);
            case QueryClass::StronglyConclusionRestricted:
                out.plan.steps.push_back(
                    {PlanStep::ConclusionRestricted, "case split for " + query.text()});
                return answer_strongly_conclusion_restricted(tree, query);
            default:
                return detail::answer_by_split(tree, query, out.plan);
        }
    };

    auto cl = validate_query(t, q);
    if (cl.complete) {
        // Already complete: reduction would be the identity, skip the
        // tree rebuild.
        out.answer = dispatch(t, q, cl);
        return out;
    }
    ReducedQuery red = reduce_to_complete(t, q);
    if (!red.trace.empty()) {
        std::string detail;
        for (const auto& s : red.trace) detail += (detail.empty() ? "" : "; ") + s;
        out.plan.steps.push_back({PlanStep::Reduce, detail});
    }
    TightAnswer ans = dispatch(red.tree, red.query, validate_query(red.tree, red.query));
    for (auto it = red.trace.rbegin(); it != red.trace.rend(); ++it)
        ans.trace.insert(ans.trace.begin(), *it);
    out.answer = std::move(ans);
    return out;
}

inline TightAnswer answer(const ConstraintTree& t, const Query& q) {
    return answer_full(t, q).answer;
}

/// Renders a planned answer: the plan steps, the engine trace, and the
/// tight answer line.
inline std::string explain(const PlannedAnswer& pa, const Query& q) {
    std::string s;
    for (const auto& step : pa.plan.steps) {
        const char* kind = step.kind == PlanStep::Reduce                 ? "reduce"
                           : step.kind == PlanStep::PremiseRestricted    ? "premise-restricted"
                           : step.kind == PlanStep::ConclusionRestricted ? "conclusion-restricted"
                                                                         : "split";
        s += std::string(kind) + ": " + step.detail + "\n";
    }
    for (const auto& line : pa.answer.trace) s += line + "\n";
    s += "tight " + q.text() + " = " + pa.answer.text() + "\n";
    return s;
}

}  // namespace cct
