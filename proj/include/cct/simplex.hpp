#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <map>
#include <string>
#include <type_traits>
#include <vector>

#include "cct/error.hpp"
#include "cct/rational.hpp"

namespace cct {

enum class LpStatus { Optimal, Infeasible, Unbounded };
enum class Relation { LessEq, Equal, GreaterEq };

/// Linear program over named variables (nonnegative by default; a free
/// variable is split internally). Rows are sparse: sum(coeff*var) REL rhs.
template <class T>
struct LinearProgramT {
    struct Row {
        std::map<std::size_t, T> coeffs;
        Relation rel = Relation::LessEq;
        T rhs{};
    };

    std::vector<std::string> var_names;
    std::vector<bool> nonneg;
    std::vector<Row> rows;
    std::map<std::size_t, T> objective;
    bool maximize = true;

    std::size_t add_var(std::string name, bool nonnegative = true) {
        var_names.push_back(std::move(name));
        nonneg.push_back(nonnegative);
        return var_names.size() - 1;
    }
    void add_row(std::map<std::size_t, T> coeffs, Relation rel, T rhs) {
        for (const auto& [v, c] : coeffs)
            if (v >= var_names.size())
                fail(ErrorKind::MalformedLp, "row references undeclared variable");
        rows.push_back({std::move(coeffs), rel, std::move(rhs)});
    }
};

template <class T>
struct LpOutcomeT {
    LpStatus status = LpStatus::Infeasible;
    T value{};
    std::vector<T> point;  // structural assignment, valid when optimal
};

using LinearProgram = LinearProgramT<Rational>;
using LpOutcome = LpOutcomeT<Rational>;

namespace detail {

template <class T>
struct FieldTraits {
    static T eps() { return T(0); }
    static void clean(T&) {}
};
template <>
struct FieldTraits<double> {
    static double eps() { return 1e-9; }
    static void clean(double& x) {
        if (x > -1e-12 && x < 1e-12) x = 0.0;
    }
};

/// Dense two-phase simplex tableau. Exact fields pivot with Bland's rule
/// throughout; floating point starts with Dantzig and falls back to Bland
/// when the objective stalls.
template <class T>
class SimplexTableau {
public:
    SimplexTableau(std::size_t rows, std::size_t cols)
        : m_(rows), cols_(cols), a_(rows + 1, std::vector<T>(cols + 1, T(0))), basis_(rows, 0) {}

    std::vector<T>& row(std::size_t i) { return a_[i]; }
    std::vector<T>& obj() { return a_[m_]; }
    T& rhs(std::size_t i) { return a_[i][cols_]; }
    std::vector<std::size_t>& basis() { return basis_; }

    /// Maximizes the installed objective row (entries are z_j - c_j).
    /// Returns false when unbounded.
    bool optimize(bool exact_field) {
        const T eps = FieldTraits<T>::eps();
        bool bland = exact_field;
        std::size_t stall = 0;
        T last_obj = a_[m_][cols_];
        for (;;) {
            std::size_t enter = cols_;
            if (bland) {
                for (std::size_t j = 0; j < cols_; ++j)
                    if (a_[m_][j] < -eps) {
                        enter = j;
                        break;
                    }
            } else {
                T best = -eps;
                for (std::size_t j = 0; j < cols_; ++j)
                    if (a_[m_][j] < best) {
                        best = a_[m_][j];
                        enter = j;
                    }
            }
            if (enter == cols_) return true;

            std::size_t leave = m_;
            T best_ratio{};
            for (std::size_t i = 0; i < m_; ++i) {
                if (a_[i][enter] <= eps) continue;
                T ratio = a_[i][cols_] / a_[i][enter];
                if (leave == m_ || ratio < best_ratio ||
                    (ratio == best_ratio && basis_[i] < basis_[leave])) {
                    leave = i;
                    best_ratio = ratio;
                }
            }
            if (leave == m_) return false;
            pivot(leave, enter);

            if (!exact_field && !bland) {
                if (a_[m_][cols_] <= last_obj) {
                    if (++stall > 64) bland = true;
                } else {
                    stall = 0;
                    last_obj = a_[m_][cols_];
                }
            }
        }
    }

    void pivot(std::size_t r, std::size_t c) {
        T p = a_[r][c];
        for (auto& x : a_[r]) x /= p;
        for (std::size_t i = 0; i <= m_; ++i) {
            if (i == r) continue;
            T f = a_[i][c];
            if (f == T(0)) continue;
            for (std::size_t j = 0; j <= cols_; ++j) {
                a_[i][j] -= f * a_[r][j];
                FieldTraits<T>::clean(a_[i][j]);
            }
        }
        basis_[r] = c;
    }

private:
    std::size_t m_, cols_;
    std::vector<std::vector<T>> a_;
    std::vector<std::size_t> basis_;
};

}  // namespace detail

namespace detail {

/// Zero-forcing presolve: a homogeneous row whose nonzero coefficients
/// all share one sign (over nonnegative variables) pins those variables
/// to zero. Certain and impossible conditionals generate exactly this
/// shape, and eliminating the pinned columns up front shrinks the
/// atomic-event programs dramatically.
template <class T>
std::vector<char> forced_zero_vars(const LinearProgramT<T>& lp) {
    std::vector<char> fixed(lp.var_names.size(), 0);
    bool changed = true;
    while (changed) {
        changed = false;
        for (const auto& r : lp.rows) {
            if (!(r.rhs == T(0))) continue;
            bool all_pos = true, all_neg = true, any = false, blocked = false;
            for (const auto& [v, c] : r.coeffs) {
                if (fixed[v] || c == T(0)) continue;
                if (!lp.nonneg[v]) {
                    blocked = true;
                    break;
                }
                any = true;
                (c > T(0) ? all_neg : all_pos) = false;
            }
            if (blocked || !any) continue;
            bool force = (r.rel == Relation::LessEq && all_pos) ||
                         (r.rel == Relation::GreaterEq && all_neg) ||
                         (r.rel == Relation::Equal && (all_pos || all_neg));
            if (!force) continue;
            for (const auto& [v, c] : r.coeffs)
                if (!fixed[v] && c != T(0)) {
                    fixed[v] = 1;
                    changed = true;
                }
        }
    }
    return fixed;
}

template <class T>
LpOutcomeT<T> solve_lp_tableau(const LinearProgramT<T>& lp);

}  // namespace detail

/// Solves the program exactly (T = Rational) or with a 1e-9 feasibility
/// tolerance (T = double).
template <class T>
LpOutcomeT<T> solve_lp(const LinearProgramT<T>& lp) {
    auto fixed = detail::forced_zero_vars(lp);
    bool anything = false;
    for (char f : fixed) anything = anything || f;
    if (!anything) return detail::solve_lp_tableau(lp);

    LinearProgramT<T> small;
    std::vector<std::size_t> to_small(lp.var_names.size(), static_cast<std::size_t>(-1));
    for (std::size_t v = 0; v < lp.var_names.size(); ++v)
        if (!fixed[v]) to_small[v] = small.add_var(lp.var_names[v], lp.nonneg[v]);
    for (const auto& r : lp.rows) {
        std::map<std::size_t, T> coeffs;
        for (const auto& [v, c] : r.coeffs)
            if (!fixed[v] && c != T(0)) coeffs[to_small[v]] = c;
        if (coeffs.empty()) {
            bool ok = (r.rel == Relation::LessEq && T(0) <= r.rhs) ||
                      (r.rel == Relation::GreaterEq && T(0) >= r.rhs) ||
                      (r.rel == Relation::Equal && T(0) == r.rhs);
            if (!ok) {
                LpOutcomeT<T> out;
                out.status = LpStatus::Infeasible;
                return out;
            }
            continue;
        }
        small.rows.push_back({std::move(coeffs), r.rel, r.rhs});
    }
    for (const auto& [v, c] : lp.objective)
        if (!fixed[v]) small.objective[to_small[v]] = c;
    small.maximize = lp.maximize;

    LpOutcomeT<T> out = detail::solve_lp_tableau(small);
    if (out.status == LpStatus::Optimal) {
        std::vector<T> point(lp.var_names.size(), T(0));
        for (std::size_t v = 0; v < lp.var_names.size(); ++v)
            if (!fixed[v]) point[v] = out.point[to_small[v]];
        out.point = std::move(point);
    }
    return out;
}

namespace detail {

template <class T>
LpOutcomeT<T> solve_lp_tableau(const LinearProgramT<T>& lp) {
    const bool exact = !std::is_floating_point_v<T>;
    const T eps = detail::FieldTraits<T>::eps();

    const std::size_t nvars = lp.var_names.size();
    std::vector<std::size_t> neg_part(nvars, static_cast<std::size_t>(-1));
    std::size_t ncols = nvars;
    for (std::size_t v = 0; v < nvars; ++v)
        if (!lp.nonneg[v]) neg_part[v] = ncols++;

    const std::size_t m = lp.rows.size();
    std::size_t nslack = 0;
    for (const auto& r : lp.rows)
        if (r.rel != Relation::Equal) ++nslack;

    // Column layout: structural | negative parts | slacks | artificials.
    const std::size_t slack_base = ncols;
    const std::size_t art_base = ncols + nslack;
    const std::size_t total = art_base + m;
    detail::SimplexTableau<T> tab(m, total);

    std::size_t next_slack = slack_base, next_art = art_base;
    std::vector<std::size_t> art_cols;
    for (std::size_t i = 0; i < m; ++i) {
        const auto& r = lp.rows[i];
        auto& row = tab.row(i);
        for (const auto& [v, c] : r.coeffs) {
            row[v] += c;
            if (neg_part[v] != static_cast<std::size_t>(-1)) row[neg_part[v]] -= c;
        }
        tab.rhs(i) = r.rhs;
        Relation rel = r.rel;
        if (tab.rhs(i) < T(0)) {
            for (auto& x : row) x = -x;
            rel = rel == Relation::LessEq      ? Relation::GreaterEq
                  : rel == Relation::GreaterEq ? Relation::LessEq
                                               : Relation::Equal;
        }
        if (rel == Relation::LessEq) {
            row[next_slack] = T(1);
            tab.basis()[i] = next_slack++;
        } else {
            if (rel == Relation::GreaterEq) row[next_slack++] = T(-1);
            row[next_art] = T(1);
            tab.basis()[i] = next_art;
            art_cols.push_back(next_art++);
        }
    }

    LpOutcomeT<T> out;

    // Phase 1: drive the artificials to zero.
    if (!art_cols.empty()) {
        auto& obj = tab.obj();
        for (std::size_t i = 0; i < m; ++i)
            if (tab.basis()[i] >= art_base)
                for (std::size_t j = 0; j <= total; ++j) obj[j] -= tab.row(i)[j];
        for (std::size_t c : art_cols) obj[c] = T(0);
        tab.optimize(exact);
        T infeas = -tab.obj()[total];
        if (infeas > (exact ? T(0) : eps)) {
            out.status = LpStatus::Infeasible;
            return out;
        }
        // Remaining basic artificials sit at level zero; pivot them out
        // where possible, remaining rows are redundant.
        for (std::size_t i = 0; i < m; ++i) {
            if (tab.basis()[i] < art_base) continue;
            for (std::size_t j = 0; j < art_base; ++j) {
                T v = tab.row(i)[j];
                if ((exact && v != T(0)) || (!exact && (v > eps || v < -eps))) {
                    tab.pivot(i, j);
                    break;
                }
            }
        }
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t c : art_cols) tab.row(i)[c] = T(0);
    }

    // Phase 2: install the real objective (z_j - c_j form), price out the basis.
    {
        auto& obj = tab.obj();
        std::fill(obj.begin(), obj.end(), T(0));
        T sign = lp.maximize ? T(1) : T(-1);
        for (const auto& [v, c] : lp.objective) {
            obj[v] -= sign * c;
            if (neg_part[v] != static_cast<std::size_t>(-1)) obj[neg_part[v]] += sign * c;
        }
        for (std::size_t i = 0; i < m; ++i) {
            std::size_t b = tab.basis()[i];
            T f = obj[b];
            if (f == T(0)) continue;
            for (std::size_t j = 0; j <= total; ++j) obj[j] -= f * tab.row(i)[j];
        }
        for (std::size_t c : art_cols) obj[c] = T(1);  // block re-entry
    }
    if (!tab.optimize(exact)) {
        out.status = LpStatus::Unbounded;
        return out;
    }

    out.status = LpStatus::Optimal;
    T value = tab.obj()[total];
    out.value = lp.maximize ? value : -value;
    out.point.assign(nvars, T(0));
    for (std::size_t i = 0; i < m; ++i) {
        std::size_t b = tab.basis()[i];
        if (b < nvars) {
            out.point[b] += tab.rhs(i);
        } else if (b < ncols) {
            for (std::size_t v = 0; v < nvars; ++v)
                if (neg_part[v] == b) out.point[v] -= tab.rhs(i);
        }
    }
    return out;
}

}  // namespace detail

}  // namespace cct
