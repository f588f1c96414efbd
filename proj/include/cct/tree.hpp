#pragma once

#include <algorithm>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "cct/model.hpp"

namespace cct {

/// One undirected tree edge carrying both conditional constraints:
/// (b|a)[ab_lo, ab_hi] and (a|b)[ba_lo, ba_hi], with a < b.
struct TreeEdge {
    EventName a, b;
    Rational ab_lo, ab_hi;  // interval of (b|a)
    Rational ba_lo, ba_hi;  // interval of (a|b)
};

/// Validated conditional constraint tree: connected, acyclic, one
/// constraint pair per edge, positive lower bounds throughout.
class ConstraintTree {
public:
    const std::vector<EventName>& events() const { return events_; }
    const std::vector<TreeEdge>& edges() const { return edges_; }
    std::size_t size() const { return events_.size(); }

    std::size_t index_of(const EventName& e) const {
        auto it = std::lower_bound(events_.begin(), events_.end(), e);
        if (it == events_.end() || *it != e) fail(ErrorKind::UnknownEvent, "unknown event: " + e);
        return static_cast<std::size_t>(it - events_.begin());
    }
    bool has_event(const EventName& e) const {
        return std::binary_search(events_.begin(), events_.end(), e);
    }
    void require_event(const EventName& e) const { (void)index_of(e); }

    /// Neighbor indices of node i.
    const std::vector<std::size_t>& neighbors(std::size_t i) const { return adj_[i]; }

    /// Interval of the constraint (to|from) on the edge {from,to}.
    std::pair<Rational, Rational> interval(std::size_t from, std::size_t to) const {
        auto it = edge_index_.find(key(from, to));
        if (it == edge_index_.end()) fail(ErrorKind::UnknownEvent, "no such edge");
        const TreeEdge& e = edges_[it->second];
        if (events_[from] == e.a) return {e.ab_lo, e.ab_hi};
        return {e.ba_lo, e.ba_hi};
    }

    bool exact() const {
        for (const auto& e : edges_)
            if (e.ab_lo != e.ab_hi || e.ba_lo != e.ba_hi) return false;
        return true;
    }

    /// Event names with exactly one neighbor (a single node counts as a leaf).
    std::vector<EventName> leaves() const {
        std::vector<EventName> out;
        for (std::size_t i = 0; i < events_.size(); ++i)
            if (adj_[i].size() <= 1) out.push_back(events_[i]);
        return out;
    }

    const KnowledgeBase& kb() const { return kb_; }

    static ConstraintTree validate(const KnowledgeBase& kb);

    /// Builds a tree directly from edges; used for the synthetic trees of
    /// query reduction and splitting. Runs the same validation.
    static ConstraintTree from_edges(std::vector<EventName> events, std::vector<TreeEdge> edges);

private:
    static std::uint64_t key(std::size_t x, std::size_t y) {
        if (x > y) std::swap(x, y);
        return (static_cast<std::uint64_t>(x) << 32) | y;
    }

    std::vector<EventName> events_;  // sorted
    std::vector<TreeEdge> edges_;
    std::vector<std::vector<std::size_t>> adj_;
    std::map<std::uint64_t, std::size_t> edge_index_;
    KnowledgeBase kb_;
};

inline ConstraintTree ConstraintTree::validate(const KnowledgeBase& kb) {
    // Group the constraints by unordered event pair; each pair must carry
    // exactly one forward and one backward constraint.
    struct Half {
        std::optional<std::pair<Rational, Rational>> fw;  // (b|a) with a < b
        std::optional<std::pair<Rational, Rational>> bw;  // (a|b)
    };
    std::map<std::pair<EventName, EventName>, Half> pairs;
    for (const auto& c : kb.constraints) {
        if (c.premise.is_top() || !c.premise.single() || !c.conclusion.single())
            fail(ErrorKind::BadEvent, "tree constraint must relate two basic events: " + c.text());
        EventName g = c.premise.atoms()[0], h = c.conclusion.atoms()[0];
        if (g == h) fail(ErrorKind::BadEvent, "self-edge: " + c.text());
        EventName a = std::min(g, h), b = std::max(g, h);
        Half& half = pairs[{a, b}];
        auto& slot = (g == a) ? half.fw : half.bw;
        if (slot) fail(ErrorKind::DuplicateEdge, "duplicate constraint on edge: " + c.text());
        slot = {c.lower, c.upper};
    }
    std::vector<TreeEdge> edges;
    for (const auto& [names, half] : pairs) {
        if (!half.fw || !half.bw)
            fail(ErrorKind::MissingReverse,
                 "edge " + names.first + " -- " + names.second + " lacks its reverse constraint");
        if (half.fw->first == 0 || half.bw->first == 0)
            fail(ErrorKind::ZeroLowerBound,
                 "edge " + names.first + " -- " + names.second + " has a zero lower bound");
        edges.push_back({names.first, names.second, half.fw->first, half.fw->second,
                         half.bw->first, half.bw->second});
    }
    return from_edges(kb.events, std::move(edges));
}

inline ConstraintTree ConstraintTree::from_edges(std::vector<EventName> events,
                                                 std::vector<TreeEdge> edges) {
    ConstraintTree t;
    t.events_ = std::move(events);
    std::sort(t.events_.begin(), t.events_.end());
    t.edges_ = std::move(edges);
    const std::size_t n = t.events_.size();
    if (n == 0) fail(ErrorKind::BadEvent, "empty event set");
    if (t.edges_.size() + 1 != n) {
        if (t.edges_.size() + 1 < n) fail(ErrorKind::NotATree, "adjacency is not connected");
        fail(ErrorKind::NotATree, "adjacency contains a cycle");
    }
    t.adj_.assign(n, {});
    std::vector<ConditionalConstraint> cs;
    for (std::size_t k = 0; k < t.edges_.size(); ++k) {
        const TreeEdge& e = t.edges_[k];
        std::size_t i = t.index_of(e.a), j = t.index_of(e.b);
        if (!t.edge_index_.emplace(key(i, j), k).second)
            fail(ErrorKind::DuplicateEdge, "duplicate edge " + e.a + " -- " + e.b);
        if (e.ab_lo == 0 || e.ba_lo == 0) fail(ErrorKind::ZeroLowerBound, "zero lower bound");
        t.adj_[i].push_back(j);
        t.adj_[j].push_back(i);
        cs.emplace_back(ConjunctiveEvent(e.b), ConjunctiveEvent(e.a), e.ab_lo, e.ab_hi);
        cs.emplace_back(ConjunctiveEvent(e.a), ConjunctiveEvent(e.b), e.ba_lo, e.ba_hi);
    }
    for (auto& nb : t.adj_) std::sort(nb.begin(), nb.end());
    // Edge count n-1 plus connectivity makes the graph a tree.
    std::vector<char> seen(n, 0);
    std::deque<std::size_t> queue{0};
    seen[0] = 1;
    std::size_t reached = 1;
    while (!queue.empty()) {
        std::size_t v = queue.front();
        queue.pop_front();
        for (std::size_t w : t.adj_[v])
            if (!seen[w]) {
                seen[w] = 1;
                ++reached;
                queue.push_back(w);
            }
    }
    if (reached != n) fail(ErrorKind::NotATree, "adjacency is not connected");
    t.kb_ = KnowledgeBase::make(t.events_, std::move(cs));
    return t;
}

/// Probabilistic query: premise E, conclusion F, disjoint conjunctions.
struct Query {
    ConjunctiveEvent conclusion;  // F
    ConjunctiveEvent premise;     // E

    Query(ConjunctiveEvent f, ConjunctiveEvent e)
        : conclusion(std::move(f)), premise(std::move(e)) {
        if (conclusion.is_top()) fail(ErrorKind::BadEvent, "top event as query conclusion");
        if (premise.is_top()) return;  // oracle queries may condition on top
        for (const auto& a : premise.atoms())
            if (conclusion.contains(a))
                fail(ErrorKind::QueryOverlap, "premise and conclusion share " + a);
    }

    std::string text() const { return "(" + conclusion.text() + " | " + premise.text() + ")"; }
};

enum class QueryClass { PremiseRestricted, StronglyConclusionRestricted, General };

struct QueryClassification {
    QueryClass cls;
    bool complete;
};

/// The tree rooted at a query premise: parents, children, strata.
/// Stratum 0 holds the deepest leaves; the root sits in the top stratum,
/// so processing nodes by increasing stratum visits children first.
class OrientedTree {
public:
    OrientedTree(const ConstraintTree& tree, const EventName& root) : tree_(&tree) {
        const std::size_t n = tree.size();
        root_ = tree.index_of(root);
        parent_.assign(n, kNone);
        children_.assign(n, {});
        depth_.assign(n, 0);
        order_.reserve(n);
        std::deque<std::size_t> queue{root_};
        std::vector<char> seen(n, 0);
        seen[root_] = 1;
        std::size_t max_depth = 0;
        while (!queue.empty()) {
            std::size_t v = queue.front();
            queue.pop_front();
            order_.push_back(v);
            for (std::size_t w : tree.neighbors(v)) {
                if (seen[w]) continue;
                seen[w] = 1;
                parent_[w] = v;
                depth_[w] = depth_[v] + 1;
                max_depth = std::max(max_depth, depth_[w]);
                children_[v].push_back(w);
                queue.push_back(w);
            }
        }
        // BFS order visits parents first; reversed it processes children first.
        std::reverse(order_.begin(), order_.end());
        stratum_.resize(n);
        for (std::size_t v = 0; v < n; ++v) stratum_[v] = max_depth - depth_[v];
        subtree_size_.assign(n, 1);
        for (std::size_t v : order_)
            if (parent_[v] != kNone) subtree_size_[parent_[v]] += subtree_size_[v];
    }

    static constexpr std::size_t kNone = static_cast<std::size_t>(-1);

    const ConstraintTree& tree() const { return *tree_; }
    std::size_t root() const { return root_; }
    std::size_t parent(std::size_t v) const { return parent_[v]; }
    const std::vector<std::size_t>& children(std::size_t v) const { return children_[v]; }
    std::size_t stratum(std::size_t v) const { return stratum_[v]; }
    std::size_t depth(std::size_t v) const { return depth_[v]; }
    /// |B(v, v^)|: v plus all its descendants.
    std::size_t scope_size(std::size_t v) const { return subtree_size_[v]; }
    /// Children-first processing order (increasing stratum along each path).
    const std::vector<std::size_t>& order() const { return order_; }
    const EventName& name(std::size_t v) const { return tree_->events()[v]; }

    /// Forward lower/upper endpoints of (child|parent) on the edge into v.
    std::pair<Rational, Rational> forward(std::size_t v) const {
        return tree_->interval(parent_[v], v);
    }
    /// Backward lower/upper endpoints of (parent|child) on the edge into v.
    std::pair<Rational, Rational> backward(std::size_t v) const {
        return tree_->interval(v, parent_[v]);
    }

    bool is_leaf(std::size_t v) const { return children_[v].empty(); }

    /// L(v): the tree leaves at or below v, as sorted names.
    std::vector<EventName> leaves_below(std::size_t v) const {
        std::vector<EventName> out;
        std::vector<std::size_t> stack{v};
        while (!stack.empty()) {
            std::size_t w = stack.back();
            stack.pop_back();
            if (children_[w].empty()) out.push_back(name(w));
            for (std::size_t c : children_[w]) stack.push_back(c);
        }
        std::sort(out.begin(), out.end());
        return out;
    }

private:
    const ConstraintTree* tree_;
    std::size_t root_;
    std::vector<std::size_t> parent_;
    std::vector<std::vector<std::size_t>> children_;
    std::vector<std::size_t> depth_, stratum_, subtree_size_;
    std::vector<std::size_t> order_;
};

inline OrientedTree orient(const ConstraintTree& t, const EventName& root) {
    return OrientedTree(t, root);
}

namespace detail {

/// Unique tree path between two node indices, inclusive of both ends.
inline std::vector<std::size_t> tree_path(const ConstraintTree& t, std::size_t from,
                                          std::size_t to) {
    if (from == to) return {from};
    std::vector<std::size_t> parent(t.size(), OrientedTree::kNone);
    std::vector<char> seen(t.size(), 0);
    std::deque<std::size_t> queue{from};
    seen[from] = 1;
    while (!queue.empty()) {
        std::size_t v = queue.front();
        queue.pop_front();
        if (v == to) break;
        for (std::size_t w : t.neighbors(v))
            if (!seen[w]) {
                seen[w] = 1;
                parent[w] = v;
                queue.push_back(w);
            }
    }
    std::vector<std::size_t> path;
    for (std::size_t v = to; v != OrientedTree::kNone; v = parent[v]) path.push_back(v);
    std::reverse(path.begin(), path.end());
    return path;
}

/// Nodes lying on every path from an atom of E to an atom of F.
inline std::vector<std::size_t> common_path_nodes(const ConstraintTree& t,
                                                  const ConjunctiveEvent& e,
                                                  const ConjunctiveEvent& f) {
    std::vector<char> common(t.size(), 1);
    bool first = true;
    for (const auto& ea : e.atoms()) {
        for (const auto& fa : f.atoms()) {
            auto path = tree_path(t, t.index_of(ea), t.index_of(fa));
            std::vector<char> on(t.size(), 0);
            for (std::size_t v : path) on[v] = 1;
            for (std::size_t v = 0; v < t.size(); ++v) common[v] = common[v] && on[v];
            first = false;
        }
    }
    std::vector<std::size_t> out;
    if (first) return out;
    for (std::size_t v = 0; v < t.size(); ++v)
        if (common[v]) out.push_back(v);
    return out;
}

}  // namespace detail

/// Classifies a query, checking the defining restrictions: disjointness
/// (already enforced by Query) and the shared-node condition on all
/// premise-to-conclusion paths.
inline QueryClassification validate_query(const ConstraintTree& t, const Query& q) {
    if (q.premise.is_top()) fail(ErrorKind::BadEvent, "tree queries cannot condition on top");
    for (const auto& a : q.premise.atoms()) t.require_event(a);
    for (const auto& a : q.conclusion.atoms()) t.require_event(a);
    auto common = detail::common_path_nodes(t, q.premise, q.conclusion);
    if (common.empty())
        fail(ErrorKind::NoCommonNode,
             "not a query: premise-to-conclusion paths share no basic event");

    // Complete: EF covers exactly the leaves. A single interior premise
    // (or conclusion) event does not break completeness; rooting there
    // still makes the other side exactly the childless nodes.
    auto leaves = t.leaves();
    std::set<EventName> ef(q.premise.atoms().begin(), q.premise.atoms().end());
    ef.insert(q.conclusion.atoms().begin(), q.conclusion.atoms().end());
    bool complete = true;
    for (const auto& l : leaves)
        if (!ef.count(l)) complete = false;
    for (const auto& x : ef) {
        if (std::binary_search(leaves.begin(), leaves.end(), x)) continue;
        bool allowed = (q.premise.single() && q.premise.contains(x)) ||
                       (q.conclusion.single() && q.conclusion.contains(x));
        if (!allowed) complete = false;
    }

    QueryClass cls = QueryClass::General;
    if (q.premise.single()) {
        // A query with both sides basic dispatches as premise-restricted.
        cls = QueryClass::PremiseRestricted;
    } else if (q.conclusion.single()) {
        // Strongly conclusion-restricted: F alone lies on all E-to-F paths.
        if (common.size() == 1 && t.events()[common[0]] == q.conclusion.atoms()[0])
            cls = QueryClass::StronglyConclusionRestricted;
    }
    return {cls, complete};
}

inline void require_event(const ConstraintTree& t, const EventName& e) { t.require_event(e); }

/// C => B: some path from an atom of C to B runs entirely along
/// certain forward constraints ((next|cur)[1,1]).
inline bool implies_exists(const ConstraintTree& t, const ConjunctiveEvent& c,
                           const EventName& b) {
    std::size_t target = t.index_of(b);
    for (const auto& a : c.atoms()) {
        auto path = detail::tree_path(t, t.index_of(a), target);
        bool ok = true;
        for (std::size_t i = 0; i + 1 < path.size(); ++i) {
            auto [lo, hi] = t.interval(path[i], path[i + 1]);
            if (lo != 1 || hi != 1) {
                ok = false;
                break;
            }
        }
        if (ok) return true;
    }
    return false;
}

/// B => C: every path from B to an atom of C is certain throughout.
inline bool implies_all(const ConstraintTree& t, const EventName& b, const ConjunctiveEvent& c) {
    std::size_t from = t.index_of(b);
    for (const auto& a : c.atoms()) {
        auto path = detail::tree_path(t, from, t.index_of(a));
        for (std::size_t i = 0; i + 1 < path.size(); ++i) {
            auto [lo, hi] = t.interval(path[i], path[i + 1]);
            if (lo != 1 || hi != 1) return false;
        }
    }
    return true;
}

struct ReducedQuery {
    ConstraintTree tree;
    Query query;
    std::vector<std::string> trace;
};

/// Reduces a query to a complete one: prune removable leaves, then give
/// every interior premise/conclusion event a certain leaf synonym.
inline ReducedQuery reduce_to_complete(const ConstraintTree& t, const Query& q) {
    validate_query(t, q);
    std::vector<std::string> trace;

    std::set<EventName> ef(q.premise.atoms().begin(), q.premise.atoms().end());
    ef.insert(q.conclusion.atoms().begin(), q.conclusion.atoms().end());

    // Step 1: repeatedly drop leaves outside EF (name order, for determinism).
    std::map<EventName, std::set<EventName>> adj;
    std::map<std::pair<EventName, EventName>, TreeEdge> edge_at;
    for (const auto& e : t.edges()) {
        adj[e.a].insert(e.b);
        adj[e.b].insert(e.a);
        edge_at[{std::min(e.a, e.b), std::max(e.a, e.b)}] = e;
    }
    std::set<EventName> alive(t.events().begin(), t.events().end());
    bool changed = true;
    while (changed) {
        changed = false;
        for (const auto& v : alive) {
            if (ef.count(v) || adj[v].size() != 1) continue;
            EventName nb = *adj[v].begin();
            adj[nb].erase(v);
            adj.erase(v);
            edge_at.erase({std::min(v, nb), std::max(v, nb)});
            alive.erase(v);
            trace.push_back("reduce: pruned leaf " + v);
            changed = true;
            break;
        }
    }

    // Step 2: synonym leaves for interior premise/conclusion events. A
    // single interior premise (or, failing that, conclusion) stays as it
    // is: rooting there keeps the other side exactly the childless set.
    auto synonym_of = [&](const EventName& v) {
        EventName s = v + "__syn";
        while (alive.count(s)) s += "_";
        return s;
    };
    EventName keep;
    if (q.premise.single())
        keep = q.premise.atoms()[0];
    else if (q.conclusion.single())
        keep = q.conclusion.atoms()[0];
    std::map<EventName, EventName> renamed;
    for (const auto& v : std::vector<EventName>(ef.begin(), ef.end())) {
        if (v == keep) continue;
        if (alive.size() > 1 && adj[v].size() == 1) continue;  // already a leaf
        if (alive.size() == 1) break;  // single-node tree: nothing to synonymize
        EventName s = synonym_of(v);
        alive.insert(s);
        adj[v].insert(s);
        adj[s].insert(v);
        TreeEdge e{std::min(v, s), std::max(v, s), 1, 1, 1, 1};
        edge_at[{e.a, e.b}] = e;
        renamed[v] = s;
        trace.push_back("reduce: added synonym " + s + " for interior event " + v);
    }

    auto rename = [&](const ConjunctiveEvent& ce) {
        std::vector<EventName> atoms;
        for (const auto& a : ce.atoms()) {
            auto it = renamed.find(a);
            atoms.push_back(it == renamed.end() ? a : it->second);
        }
        return ConjunctiveEvent(std::move(atoms));
    };

    std::vector<TreeEdge> edges;
    for (const auto& [k, e] : edge_at) edges.push_back(e);
    ConstraintTree reduced =
        ConstraintTree::from_edges({alive.begin(), alive.end()}, std::move(edges));
    Query rq(rename(q.conclusion), rename(q.premise));
    return {std::move(reduced), std::move(rq), std::move(trace)};
}

struct Split {
    EventName at;          // G
    ConstraintTree left;   // premise side, contains G
    ConstraintTree right;  // conclusion side, contains G
};

namespace detail {

/// Subtree over a node subset, keeping the induced edges.
inline ConstraintTree induced_tree(const ConstraintTree& t, const std::set<std::size_t>& nodes) {
    std::vector<EventName> events;
    for (std::size_t v : nodes) events.push_back(t.events()[v]);
    std::vector<TreeEdge> edges;
    for (const auto& e : t.edges())
        if (nodes.count(t.index_of(e.a)) && nodes.count(t.index_of(e.b))) edges.push_back(e);
    return ConstraintTree::from_edges(std::move(events), std::move(edges));
}

}  // namespace detail

/// Splits a complete query that is neither premise- nor strongly
/// conclusion-restricted at a basic event G lying on every premise-to-
/// conclusion path, so that (G|E) is strongly conclusion-restricted and
/// complete on the premise-side subtree. Among qualifying nodes the one
/// closest to the conclusion is chosen.
inline Split split_at_articulation(const ConstraintTree& t, const Query& q) {
    auto cl = validate_query(t, q);
    if (!cl.complete) fail(ErrorKind::Precondition, "split requires a complete query");
    if (cl.cls != QueryClass::General)
        fail(ErrorKind::Precondition, "query does not need splitting");

    auto common = detail::common_path_nodes(t, q.premise, q.conclusion);
    // Walk candidates from the conclusion end of the common segment.
    std::size_t f0 = t.index_of(q.conclusion.atoms()[0]);
    std::sort(common.begin(), common.end(), [&](std::size_t x, std::size_t y) {
        return detail::tree_path(t, x, f0).size() < detail::tree_path(t, y, f0).size();
    });

    for (std::size_t g : common) {
        const EventName& gname = t.events()[g];
        if (q.premise.contains(gname) || q.conclusion.contains(gname)) continue;
        // Components of t - g: conclusion components go right, the rest left.
        std::set<std::size_t> left{g}, right{g};
        for (std::size_t start : t.neighbors(g)) {
            std::set<std::size_t> comp;
            std::deque<std::size_t> queue{start};
            comp.insert(start);
            while (!queue.empty()) {
                std::size_t v = queue.front();
                queue.pop_front();
                for (std::size_t w : t.neighbors(v))
                    if (w != g && !comp.count(w)) {
                        comp.insert(w);
                        queue.push_back(w);
                    }
            }
            bool has_f = false;
            for (std::size_t v : comp)
                if (q.conclusion.contains(t.events()[v])) has_f = true;
            (has_f ? right : left).insert(comp.begin(), comp.end());
        }
        bool e_in_left = true;
        for (const auto& a : q.premise.atoms())
            if (!left.count(t.index_of(a))) e_in_left = false;
        if (!e_in_left) continue;

        ConstraintTree t1 = detail::induced_tree(t, left);
        Query gq(ConjunctiveEvent(gname), q.premise);
        auto gcl = validate_query(t1, gq);
        if (gcl.cls != QueryClass::StronglyConclusionRestricted || !gcl.complete) continue;

        ConstraintTree t2 = detail::induced_tree(t, right);
        return {gname, std::move(t1), std::move(t2)};
    }
    fail(ErrorKind::Precondition, "no admissible split node found");
}

}  // namespace cct
