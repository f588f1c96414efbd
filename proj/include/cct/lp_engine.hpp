#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "cct/propagation.hpp"
#include "cct/simplex.hpp"
#include "cct/tree.hpp"

namespace cct {

/// Linear expression over per-node variables x_G. There is no constant
/// term: constants ride on the root variable, which J pins to one.
struct LinExpr {
    std::map<std::size_t, Rational> coeffs;  // node index -> coefficient

    LinExpr() = default;
    static LinExpr var(std::size_t v) {
        LinExpr e;
        e.coeffs[v] = 1;
        return e;
    }
    LinExpr& add(const LinExpr& o, const Rational& factor = 1) {
        for (const auto& [v, c] : o.coeffs) {
            Rational& slot = coeffs[v];
            slot += factor * c;
            if (slot == 0) coeffs.erase(v);
        }
        return *this;
    }
    LinExpr& add_var(std::size_t v, const Rational& c) {
        Rational& slot = coeffs[v];
        slot += c;
        if (slot == 0) coeffs.erase(v);
        return *this;
    }
    LinExpr& scale(const Rational& f) {
        if (f == 0) {
            coeffs.clear();
            return *this;
        }
        for (auto& [v, c] : coeffs) c *= f;
        return *this;
    }

    friend bool operator==(const LinExpr& a, const LinExpr& b) { return a.coeffs == b.coeffs; }
    friend bool operator<(const LinExpr& a, const LinExpr& b) {
        return std::lexicographical_compare(
            a.coeffs.begin(), a.coeffs.end(), b.coeffs.begin(), b.coeffs.end(),
            [](const auto& x, const auto& y) {
                if (x.first != y.first) return x.first < y.first;
                return x.second < y.second;
            });
    }

    /// True when every coefficient is <= the corresponding one of o, so
    /// this expression bounds o from below wherever all variables are
    /// nonnegative.
    bool dominates(const LinExpr& o) const {
        auto a = coeffs.begin();
        auto b = o.coeffs.begin();
        while (a != coeffs.end() || b != o.coeffs.end()) {
            if (b == o.coeffs.end() || (a != coeffs.end() && a->first < b->first)) {
                if (a->second > 0) return false;
                ++a;
            } else if (a == coeffs.end() || b->first < a->first) {
                if (b->second < 0) return false;
                ++b;
            } else {
                if (a->second > b->second) return false;
                ++a;
                ++b;
            }
        }
        return true;
    }
};

/// Pointwise minimum of finitely many linear expressions; operands are
/// kept sorted and duplicate-free.
struct MinExpr {
    std::vector<LinExpr> operands;

    void normalize() {
        std::sort(operands.begin(), operands.end());
        operands.erase(std::unique(operands.begin(), operands.end()), operands.end());
    }
    std::size_t size() const { return operands.size(); }
};

/// Removes every operand pointwise-dominated by another (sound because J
/// keeps all variables nonnegative); the pointwise minimum over the
/// feasible region is unchanged. Candidate pairs are prefiltered by
/// comparing values at a few fixed positive points, which prunes almost
/// all exact coefficient comparisons on large operand sets.
inline MinExpr subsume(const MinExpr& m) {
    const std::size_t k = m.operands.size();
    constexpr int kProbes = 3;
    std::vector<std::array<double, kProbes>> probe(k);
    for (std::size_t i = 0; i < k; ++i) {
        probe[i].fill(0.0);
        for (const auto& [v, c] : m.operands[i].coeffs) {
            double cd = c.get_d();
            unsigned long long h = (v + 1) * 2654435761ull;
            probe[i][0] += cd;
            probe[i][1] += cd * (1.0 + (h % 97) / 97.0);
            probe[i][2] += cd * (0.1 + (h % 31) / 31.0);
        }
    }
    auto maybe_dominates = [&](std::size_t i, std::size_t j) {
        for (int p = 0; p < kProbes; ++p)
            if (probe[i][p] > probe[j][p] + 1e-9) return false;
        return true;
    };
    std::vector<char> dead(k, 0);
    for (std::size_t i = 0; i < k; ++i) {
        if (dead[i]) continue;
        for (std::size_t j = 0; j < k; ++j) {
            if (i == j || dead[j]) continue;
            if (maybe_dominates(i, j) && m.operands[i].dominates(m.operands[j])) dead[j] = 1;
        }
    }
    MinExpr out;
    for (std::size_t i = 0; i < k; ++i)
        if (!dead[i]) out.operands.push_back(m.operands[i]);
    return out;
}

struct MinTriple {
    MinExpr alpha, beta, gamma;
};

/// Bottom-up construction of the J-function triples at every node; the
/// entry at the root drives the upper-bound program. Child triples are
/// released once their parent is done.
inline MinTriple build_minexpr_triples(const OrientedTree& ot) {
    std::vector<MinTriple> triple(ot.tree().size());
    for (std::size_t v : ot.order()) {
        const auto& ch = ot.children(v);
        MinTriple& tv = triple[v];
        if (ch.empty()) {
            tv.alpha.operands = {LinExpr::var(v)};
            tv.beta.operands = {LinExpr()};  // the zero expression
            tv.gamma.operands = {LinExpr::var(v)};
            continue;
        }
        // Chain each child edge, then fuse.
        std::vector<MinTriple> chained;
        chained.reserve(ch.size());
        for (std::size_t c : ch) {
            Rational w = ot.backward(c).first;  // Pr1(v|c)
            MinTriple& tc = triple[c];
            MinTriple e;
            if (ot.is_leaf(c)) {
                // A leaf child's alpha collapses to x_c under J.
                e.alpha.operands = {LinExpr::var(c)};
            } else {
                e.alpha.operands.push_back(LinExpr::var(v));
                for (const auto& b : tc.beta.operands) {
                    LinExpr ex = LinExpr::var(c);
                    ex.add(b, 1 / w);
                    e.alpha.operands.push_back(std::move(ex));
                }
                for (const auto& a : tc.alpha.operands) {
                    LinExpr ex = LinExpr::var(v);
                    ex.add_var(c, -1);
                    ex.add(a, 1 / w);
                    e.alpha.operands.push_back(std::move(ex));
                }
            }
            for (const auto& b : tc.beta.operands) {
                LinExpr ex;
                ex.add_var(c, (1 - w) / w);
                ex.add(b, 1 / w);
                e.beta.operands.push_back(std::move(ex));
            }
            for (const auto& g : tc.gamma.operands) {
                LinExpr ex = g;
                ex.scale(1 / w);
                e.gamma.operands.push_back(std::move(ex));
            }
            triple[c] = MinTriple();  // no longer needed
            chained.push_back(std::move(e));
        }
        if (chained.size() == 1) {
            tv = std::move(chained[0]);
        } else {
            for (auto& e : chained) {
                tv.alpha.operands.insert(tv.alpha.operands.end(), e.alpha.operands.begin(),
                                         e.alpha.operands.end());
                tv.beta.operands.insert(tv.beta.operands.end(), e.beta.operands.begin(),
                                        e.beta.operands.end());
                tv.gamma.operands.insert(tv.gamma.operands.end(), e.gamma.operands.begin(),
                                         e.gamma.operands.end());
            }
            for (std::size_t i = 0; i < chained.size(); ++i)
                for (std::size_t j = 0; j < chained.size(); ++j) {
                    if (i == j) continue;
                    for (const auto& a : chained[i].alpha.operands)
                        for (const auto& b : chained[j].beta.operands) {
                            LinExpr ex = a;
                            ex.add(b);
                            tv.gamma.operands.push_back(std::move(ex));
                        }
                }
        }
        tv.alpha.normalize();
        tv.beta.normalize();
        tv.gamma.normalize();
    }
    return std::move(triple[ot.root()]);
}

struct JConstraint {
    std::size_t parent, child;
    Rational lo, hi;  // forward interval of (child|parent)
};

/// J(E, E^): the root pin plus one interval pair per edge, following the
/// forward constraint of each parent->child edge. 2n inequalities for an
/// n-node tree, counting the pin as two.
inline std::vector<JConstraint> build_j_constraints(const OrientedTree& ot) {
    std::vector<JConstraint> out;
    for (std::size_t v = 0; v < ot.tree().size(); ++v) {
        if (v == ot.root()) continue;
        auto [lo, hi] = ot.forward(v);
        out.push_back({ot.parent(v), v, lo, hi});
    }
    std::sort(out.begin(), out.end(),
              [](const JConstraint& a, const JConstraint& b) { return a.child < b.child; });
    return out;
}

/// Assembled upper-bound program plus the counting data used by the
/// complexity checks. `generated` counts the J system (2n) plus the raw
/// alpha/gamma operands; this is the convention that reproduces the
/// worked nine-node figure. `lp` itself carries the subsumed rows.
struct UpperLp {
    LinearProgram lp;
    std::size_t x_var = 0;                 // objective variable index
    std::vector<std::size_t> node_var;     // node index -> lp variable
    std::size_t j_row_count = 0;           // rows belonging to J (incl. pin)
    std::size_t raw_alpha = 0, raw_gamma = 0;
    std::size_t kept_alpha = 0, kept_gamma = 0;
    std::size_t generated() const { return j_row_count + raw_alpha + raw_gamma; }
    std::vector<LinExpr> bounds;           // subsumed alpha then gamma operands
};

inline UpperLp assemble_upper_lp(const OrientedTree& ot) {
    MinTriple root = build_minexpr_triples(ot);
    UpperLp out;
    out.raw_alpha = root.alpha.size();
    out.raw_gamma = root.gamma.size();
    MinExpr alpha = subsume(root.alpha);
    MinExpr gamma = subsume(root.gamma);
    out.kept_alpha = alpha.size();
    out.kept_gamma = gamma.size();

    LinearProgram& lp = out.lp;
    out.x_var = lp.add_var("x");
    out.node_var.resize(ot.tree().size());
    for (std::size_t v = 0; v < ot.tree().size(); ++v)
        out.node_var[v] = lp.add_var("x_" + ot.name(v));

    // Root pin as two inequalities, then the per-edge interval pairs.
    lp.add_row({{out.node_var[ot.root()], Rational(1)}}, Relation::GreaterEq, 1);
    lp.add_row({{out.node_var[ot.root()], Rational(1)}}, Relation::LessEq, 1);
    for (const auto& jc : build_j_constraints(ot)) {
        lp.add_row({{out.node_var[jc.child], Rational(1)}, {out.node_var[jc.parent], -jc.lo}},
                   Relation::GreaterEq, 0);
        lp.add_row({{out.node_var[jc.child], Rational(1)}, {out.node_var[jc.parent], -jc.hi}},
                   Relation::LessEq, 0);
    }
    out.j_row_count = lp.rows.size();

    auto add_bound = [&](const LinExpr& e) {
        std::map<std::size_t, Rational> row{{out.x_var, Rational(1)}};
        for (const auto& [v, c] : e.coeffs) row[out.node_var[v]] = -c;
        lp.add_row(std::move(row), Relation::LessEq, 0);
        out.bounds.push_back(e);
    };
    for (const auto& e : alpha.operands) add_bound(e);
    for (const auto& e : gamma.operands) add_bound(e);

    lp.objective[out.x_var] = 1;
    lp.maximize = true;
    return out;
}

/// Renders the program in the diffable dump format: objective first, one
/// line per x-bound (operands already in canonical order), then J.
inline std::string dump_upper_lp(const OrientedTree& ot, const UpperLp& u) {
    auto coeff = [](const Rational& c) { return to_string(c); };
    std::string s = "max x\n";
    for (const auto& e : u.bounds) {
        std::string line = "x <=";
        if (e.coeffs.empty()) line += " 0";
        bool first = true;
        for (const auto& [v, c] : e.coeffs) {
            if (first)
                line += c < 0 ? " -" : " ";
            else
                line += c < 0 ? " - " : " + ";
            Rational a = c < 0 ? Rational(-c) : c;
            if (a != 1) line += coeff(a) + " ";
            line += "x_" + ot.name(v);
            first = false;
        }
        s += line + "\n";
    }
    s += "1 <= x_" + ot.name(ot.root()) + "\n";
    s += "x_" + ot.name(ot.root()) + " <= 1\n";
    for (const auto& jc : build_j_constraints(ot)) {
        s += coeff(jc.lo) + " x_" + ot.name(jc.parent) + " <= x_" + ot.name(jc.child) + "\n";
        s += "x_" + ot.name(jc.child) + " <= " + coeff(jc.hi) + " x_" + ot.name(jc.parent) + "\n";
    }
    return s;
}

namespace detail {

/// Solves the assembled program. Past a few hundred bound rows the rows
/// are activated lazily: the optimal basis touches at most one row per
/// variable, so most bounds never enter the tableau.
inline LpOutcome solve_upper(const UpperLp& u) {
    const std::size_t nbounds = u.lp.rows.size() - u.j_row_count;
    if (nbounds <= 512) return solve_lp(u.lp);

    LinearProgram active;
    active.var_names = u.lp.var_names;
    active.nonneg = u.lp.nonneg;
    active.objective = u.lp.objective;
    active.maximize = true;
    for (std::size_t i = 0; i < u.j_row_count; ++i) active.rows.push_back(u.lp.rows[i]);
    std::vector<char> used(u.lp.rows.size(), 0);
    std::size_t first_batch = 64;
    for (std::size_t i = u.j_row_count; i < u.lp.rows.size() && first_batch; --first_batch, ++i) {
        active.rows.push_back(u.lp.rows[i]);
        used[i] = 1;
    }
    for (;;) {
        LpOutcome out = solve_lp(active);
        if (out.status == LpStatus::Unbounded) {
            std::size_t added = 0;
            for (std::size_t i = u.j_row_count; i < u.lp.rows.size() && added < 64; ++i)
                if (!used[i]) {
                    active.rows.push_back(u.lp.rows[i]);
                    used[i] = 1;
                    ++added;
                }
            if (added == 0) return out;
            continue;
        }
        if (out.status != LpStatus::Optimal) return out;
        // Collect violated inactive rows at the current optimum.
        std::vector<std::pair<Rational, std::size_t>> violated;
        for (std::size_t i = u.j_row_count; i < u.lp.rows.size(); ++i) {
            if (used[i]) continue;
            Rational lhs = 0;
            for (const auto& [v, c] : u.lp.rows[i].coeffs) lhs += c * out.point[v];
            if (lhs > u.lp.rows[i].rhs) violated.push_back({lhs - u.lp.rows[i].rhs, i});
        }
        if (violated.empty()) return out;
        std::sort(violated.begin(), violated.end(),
                  [](const auto& a, const auto& b) { return a.first > b.first; });
        std::size_t take = std::min<std::size_t>(violated.size(), 256);
        for (std::size_t k = 0; k < take; ++k) {
            active.rows.push_back(u.lp.rows[violated[k].second]);
            used[violated[k].second] = 1;
        }
    }
}

}  // namespace detail

/// Tight answer to a premise-restricted complete query on a general
/// (interval) tree: exact lower bound by propagation, least upper bound
/// by the assembled linear program.
inline TightAnswer answer_premise_restricted_general(const ConstraintTree& t, const Query& q) {
    OrientedTree ot = detail::checked_premise_orientation(t, q);
    auto alpha = h1_alpha_all(ot);
    UpperLp u = assemble_upper_lp(ot);
    LpOutcome lo = detail::solve_upper(u);
    if (lo.status != LpStatus::Optimal)
        fail(ErrorKind::MalformedLp, "upper-bound program did not solve to optimality");
    TightAnswer ans = TightAnswer::of(alpha[ot.root()], lo.value);
    ans.trace.push_back("general engine: lower bound by propagation, upper bound by linear program");
    ans.trace.push_back("lp: " + std::to_string(u.lp.var_names.size()) + " variables, " +
                        std::to_string(u.generated()) + " generated inequalities (" +
                        std::to_string(u.j_row_count) + " J + " + std::to_string(u.raw_alpha) +
                        " alpha + " + std::to_string(u.raw_gamma) + " gamma), " +
                        std::to_string(u.lp.rows.size()) + " after subsumption");
    if (t.size() <= kTraceLimit) detail::trace_propagation(ot, alpha, nullptr, ans.trace);
    return ans;
}

}  // namespace cct
