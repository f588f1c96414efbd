#pragma once

#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "cct/model.hpp"
#include "cct/oracle.hpp"
#include "cct/tree.hpp"

namespace cct {

/// Parsed knowledge-base document. Tree mode additionally validates the
/// constraint-tree shape; kb mode admits conjunctive events and top
/// premises for the oracle.
struct KbDocument {
    enum Mode { Tree, Kb } mode = Tree;
    KnowledgeBase kb;
    std::optional<ConstraintTree> tree;  // present in tree mode
};

namespace detail {

struct Cursor {
    std::string_view text;
    std::size_t pos = 0, line = 1, col = 1;

    bool done() const { return pos >= text.size(); }
    char peek() const { return text[pos]; }
    void advance() {
        if (text[pos] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
        ++pos;
    }
    void skip_space_in_line() {
        while (!done() && (peek() == ' ' || peek() == '\t' || peek() == '\r')) advance();
    }
    [[noreturn]] void error(const std::string& what) const {
        fail(ErrorKind::Parse, "line " + std::to_string(line) + ", column " +
                                   std::to_string(col) + ": " + what);
    }
};

inline std::string next_token(Cursor& c) {
    c.skip_space_in_line();
    std::string tok;
    while (!c.done()) {
        char ch = c.peek();
        if (ch == ' ' || ch == '\t' || ch == '\r' || ch == '\n' || ch == '#') break;
        if (ch == '(' || ch == ')' || ch == '|' || ch == '[' || ch == ']' || ch == ',') {
            if (tok.empty()) {
                tok += ch;
                c.advance();
            }
            break;
        }
        tok += ch;
        c.advance();
    }
    return tok;
}

inline void expect(Cursor& c, const std::string& want) {
    std::string got = next_token(c);
    if (got != want) c.error("expected '" + want + "', found '" + got + "'");
}

inline std::vector<std::string> atom_list(Cursor& c, const std::string& until) {
    std::vector<std::string> atoms;
    for (;;) {
        c.skip_space_in_line();
        if (c.done()) c.error("unterminated event list");
        if (c.peek() == until[0]) {
            c.advance();
            return atoms;
        }
        std::string tok = next_token(c);
        if (tok.empty()) c.error("unterminated event list");
        atoms.push_back(tok);
    }
}

inline Rational rational_token(Cursor& c) {
    std::string tok = next_token(c);
    auto q = parse_rational(tok);
    if (!q) c.error("not a number: '" + tok + "'");
    return *q;
}

}  // namespace detail

/// Grammar: header `tree` or `kb`, then `constraint (H | G) [l, u]` lines
/// (`[l]` abbreviates `[l, l]`, `*` is the true event, `#` comments).
/// Events are declared implicitly.
inline KbDocument parse_kb(std::string_view text) {
    detail::Cursor c{text};
    KbDocument doc;
    bool have_header = false;
    std::vector<EventName> events;
    std::vector<ConditionalConstraint> cs;

    auto skip_to_eol = [&] {
        while (!c.done() && c.peek() != '\n') c.advance();
        if (!c.done()) c.advance();
    };

    while (!c.done()) {
        c.skip_space_in_line();
        if (c.done()) break;
        if (c.peek() == '\n' || c.peek() == '#') {
            skip_to_eol();
            continue;
        }
        std::string head = detail::next_token(c);
        if (!have_header) {
            if (head == "tree")
                doc.mode = KbDocument::Tree;
            else if (head == "kb")
                doc.mode = KbDocument::Kb;
            else
                c.error("expected header 'tree' or 'kb', found '" + head + "'");
            have_header = true;
            skip_to_eol();
            continue;
        }
        if (head != "constraint") c.error("expected 'constraint', found '" + head + "'");
        detail::expect(c, "(");
        auto h_atoms = detail::atom_list(c, "|");
        auto g_atoms = detail::atom_list(c, ")");
        detail::expect(c, "[");
        Rational lo = detail::rational_token(c);
        c.skip_space_in_line();
        Rational hi = lo;
        std::string sep = detail::next_token(c);
        if (sep == ",") {
            hi = detail::rational_token(c);
            detail::expect(c, "]");
        } else if (sep != "]") {
            c.error("expected ',' or ']', found '" + sep + "'");
        }

        bool g_top = g_atoms.size() == 1 && g_atoms[0] == "*";
        if (g_top && doc.mode == KbDocument::Tree) c.error("'*' premise is not allowed in tree mode");
        for (const auto& a : h_atoms) {
            if (a == "*") c.error("'*' cannot appear as a conclusion");
            if (!valid_event_name(a)) c.error("bad event name '" + a + "'");
        }
        if (!g_top)
            for (const auto& a : g_atoms)
                if (!valid_event_name(a)) c.error("bad event name '" + a + "'");
        if (h_atoms.empty()) c.error("empty conclusion");
        if (g_atoms.empty()) c.error("empty premise");
        if (!in_unit_interval(lo) || !in_unit_interval(hi))
            c.error("probability outside [0,1]");
        if (lo > hi) c.error("lower bound exceeds upper bound");

        for (const auto& a : h_atoms) events.push_back(a);
        if (!g_top)
            for (const auto& a : g_atoms) events.push_back(a);
        cs.emplace_back(ConjunctiveEvent(h_atoms),
                        g_top ? ConjunctiveEvent::top() : ConjunctiveEvent(g_atoms), lo, hi);
        skip_to_eol();
    }
    if (!have_header) fail(ErrorKind::Parse, "empty document: missing 'tree' or 'kb' header");

    std::sort(events.begin(), events.end());
    events.erase(std::unique(events.begin(), events.end()), events.end());
    doc.kb = KnowledgeBase::make(std::move(events), std::move(cs));
    if (doc.mode == KbDocument::Tree) doc.tree = ConstraintTree::validate(doc.kb);
    return doc;
}

/// Renders a document back into the constraint-line grammar.
inline std::string render_kb(const KbDocument& doc) {
    std::string s = doc.mode == KbDocument::Tree ? "tree\n" : "kb\n";
    for (const auto& c : doc.kb.constraints) {
        s += "constraint (" + c.conclusion.text() + " | " + c.premise.text() + ") [" +
             to_string(c.lower);
        if (c.upper != c.lower) s += ", " + to_string(c.upper);
        s += "]\n";
    }
    return s;
}

/// Query grammar: `(F | E)` with atom lists; `*` premise for oracle use.
inline Query parse_query(std::string_view text) {
    detail::Cursor c{text};
    detail::expect(c, "(");
    auto f_atoms = detail::atom_list(c, "|");
    auto e_atoms = detail::atom_list(c, ")");
    c.skip_space_in_line();
    if (!c.done() && c.peek() != '\n') c.error("trailing input after query");
    if (f_atoms.empty()) c.error("empty conclusion");
    if (e_atoms.empty()) c.error("empty premise");
    bool e_top = e_atoms.size() == 1 && e_atoms[0] == "*";
    for (const auto& a : f_atoms)
        if (!valid_event_name(a)) c.error("bad event name '" + a + "'");
    if (!e_top)
        for (const auto& a : e_atoms)
            if (!valid_event_name(a)) c.error("bad event name '" + a + "'");
    return Query(ConjunctiveEvent(f_atoms),
                 e_top ? ConjunctiveEvent::top() : ConjunctiveEvent(e_atoms));
}

/// Graph file: `v <name>` and `e <name> <name>` lines, `#` comments.
inline Graph parse_graph(std::string_view text) {
    std::vector<std::string> vertices;
    std::vector<std::pair<std::string, std::string>> edges;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream ls(line);
        std::string kind;
        if (!(ls >> kind) || kind[0] == '#') continue;
        auto err = [&](const std::string& what) {
            fail(ErrorKind::Parse, "line " + std::to_string(lineno) + ": " + what);
        };
        if (kind == "v") {
            std::string name;
            if (!(ls >> name)) err("vertex line needs a name");
            if (!valid_event_name(name)) err("bad vertex name '" + name + "'");
            vertices.push_back(name);
        } else if (kind == "e") {
            std::string a, b;
            if (!(ls >> a >> b)) err("edge line needs two names");
            edges.push_back({a, b});
        } else {
            err("expected 'v' or 'e', found '" + kind + "'");
        }
    }
    return Graph::make(std::move(vertices), std::move(edges));
}

}  // namespace cct
