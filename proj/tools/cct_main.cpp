#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "cct/io.hpp"
#include "cct/lp_engine.hpp"
#include "cct/oracle.hpp"
#include "cct/planner.hpp"

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) cct::fail(cct::ErrorKind::Parse, "cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string answer_line(const cct::Query& q, const cct::TightAnswer& a) {
    if (a.empty_consequence) return "tight " + q.text() + " = [1, 0] (inconsistent premise)";
    return "tight " + q.text() + " = [" + cct::to_string(a.lower) + ", " +
           cct::to_string(a.upper) + "]  (~[" + cct::to_decimal(a.lower) + ", " +
           cct::to_decimal(a.upper) + "])";
}

nlohmann::json answer_json(const cct::TightAnswer& a) {
    return nlohmann::json{{"lower", cct::to_string(a.lower)},
                          {"upper", cct::to_string(a.upper)},
                          {"lower_decimal", cct::to_decimal(a.lower)},
                          {"upper_decimal", cct::to_decimal(a.upper)},
                          {"empty_consequence", a.empty_consequence},
                          {"trace", a.trace}};
}

/// Chain M1 - ... - Mn or complete binary tree with mildly generic
/// interval values (denominators stay small so timings measure structure).
cct::ConstraintTree bench_tree(const std::string& topology, std::size_t n, bool exact) {
    using cct::Rational;
    std::vector<std::string> events;
    std::vector<cct::TreeEdge> edges;
    auto name = [&](std::size_t i) {
        std::string s = std::to_string(i);
        return "M" + std::string(6 - std::min<std::size_t>(6, s.size()), '0') + s;
    };
    auto lo = [&](std::size_t i) { return Rational(17 + (i % 3), 20); };
    for (std::size_t i = 0; i < n; ++i) events.push_back(name(i));
    auto link = [&](std::size_t p, std::size_t c) {
        cct::TreeEdge e;
        e.a = std::min(name(p), name(c));
        e.b = std::max(name(p), name(c));
        Rational fw = lo(p + c);
        // exact benches mirror the endpoints so propagated values keep a
        // fixed denominator and the timing reflects the linear pass
        e.ab_lo = fw;
        e.ab_hi = exact ? fw : Rational(19, 20);
        e.ba_lo = fw;
        e.ba_hi = exact ? fw : Rational(19, 20);
        edges.push_back(e);
    };
    if (topology == "chain") {
        for (std::size_t i = 1; i < n; ++i) link(i - 1, i);
    } else if (topology == "binary") {
        for (std::size_t i = 1; i < n; ++i) link((i - 1) / 2, i);
    } else {
        cct::fail(cct::ErrorKind::Parse, "unknown topology: " + topology);
    }
    return cct::ConstraintTree::from_edges(std::move(events), std::move(edges));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"probabilistic deduction in conditional constraint trees"};
    app.require_subcommand(1);

    std::string kb_path, query_text, graph_path;
    bool show_trace = false, as_json = false;

    auto* validate = app.add_subcommand("validate", "parse and validate a knowledge base");
    validate->add_option("kb", kb_path)->required();

    auto* query = app.add_subcommand("query", "tight answer via the tree engines");
    query->add_option("kb", kb_path)->required();
    query->add_option("query", query_text)->required();
    query->add_flag("--trace", show_trace, "print the deduction trace");
    query->add_flag("--json", as_json, "machine-readable answer");

    auto* oracle = app.add_subcommand("oracle", "tight answer via the atomic-event program");
    oracle->add_option("kb", kb_path)->required();
    oracle->add_option("query", query_text)->required();
    oracle->add_flag("--json", as_json);

    auto* sat = app.add_subcommand("sat", "satisfiability of a knowledge base");
    sat->add_option("kb", kb_path)->required();

    auto* model = app.add_subcommand("model", "positive model of a constraint tree");
    model->add_option("kb", kb_path)->required();

    auto* emit = app.add_subcommand("emit-lp", "dump the upper-bound linear program");
    emit->add_option("kb", kb_path)->required();
    emit->add_option("query", query_text)->required();

    auto* gen = app.add_subcommand("gen-3col", "encode graph 3-colorability as a kb document");
    gen->add_option("graph", graph_path)->required();

    std::string topology = "chain";
    std::size_t bench_n = 1000;
    auto* bench = app.add_subcommand("bench", "timing and inequality counts");
    bench->add_option("--topology", topology)->check(CLI::IsMember({"chain", "binary"}));
    bench->add_option("--n", bench_n)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*validate) {
            cct::KbDocument doc = cct::parse_kb(read_file(kb_path));
            std::cout << (doc.mode == cct::KbDocument::Tree ? "valid tree, " : "valid kb, ")
                      << doc.kb.events.size() << " events, " << doc.kb.constraints.size()
                      << " constraints\n";
        } else if (*query) {
            cct::KbDocument doc = cct::parse_kb(read_file(kb_path));
            if (!doc.tree)
                cct::fail(cct::ErrorKind::Precondition,
                          "the tree engine needs a tree-mode document");
            cct::Query q = cct::parse_query(query_text);
            cct::PlannedAnswer pa = cct::answer_full(*doc.tree, q);
            if (as_json) {
                std::cout << answer_json(pa.answer).dump(2) << "\n";
            } else {
                if (show_trace) std::cout << cct::explain(pa, q);
                else std::cout << answer_line(q, pa.answer) << "\n";
            }
        } else if (*oracle) {
            cct::KbDocument doc = cct::parse_kb(read_file(kb_path));
            cct::Query q = cct::parse_query(query_text);
            cct::OracleAnswer oa = cct::oracle_answer(doc.kb, q);
            if (as_json) {
                auto j = answer_json(oa.answer);
                j["approximate"] = oa.approximate;
                std::cout << j.dump(2) << "\n";
            } else {
                std::cout << answer_line(q, oa.answer)
                          << (oa.approximate ? "  [floating point]" : "") << "\n";
            }
        } else if (*sat) {
            cct::KbDocument doc = cct::parse_kb(read_file(kb_path));
            bool ok = cct::satisfiable(doc.kb);
            std::cout << (ok ? "satisfiable\n" : "unsatisfiable\n");
        } else if (*model) {
            cct::KbDocument doc = cct::parse_kb(read_file(kb_path));
            if (!doc.tree)
                cct::fail(cct::ErrorKind::Precondition, "positive models need a tree document");
            cct::Interpretation pr = cct::construct_positive_model(*doc.tree);
            for (const auto& [w, m] : pr.mass()) {
                std::string world;
                for (std::size_t i = 0; i < pr.events().size(); ++i) {
                    if (!world.empty()) world += ' ';
                    world += ((w >> i) & 1) ? pr.events()[i] : "~" + pr.events()[i];
                }
                std::cout << world << " : " << cct::to_string(m) << "\n";
            }
        } else if (*emit) {
            cct::KbDocument doc = cct::parse_kb(read_file(kb_path));
            if (!doc.tree)
                cct::fail(cct::ErrorKind::Precondition, "emit-lp needs a tree document");
            cct::Query q = cct::parse_query(query_text);
            cct::ReducedQuery red = cct::reduce_to_complete(*doc.tree, q);
            auto cl = cct::validate_query(red.tree, red.query);
            if (cl.cls != cct::QueryClass::PremiseRestricted)
                cct::fail(cct::ErrorKind::Classification,
                          "emit-lp expects a premise-restricted query");
            cct::OrientedTree ot = cct::orient(red.tree, red.query.premise.atoms()[0]);
            cct::UpperLp u = cct::assemble_upper_lp(ot);
            std::cout << cct::dump_upper_lp(ot, u);
        } else if (*gen) {
            cct::Graph g = cct::parse_graph(read_file(graph_path));
            cct::KbDocument doc;
            doc.mode = cct::KbDocument::Kb;
            doc.kb = cct::encode_3col(g);
            std::cout << cct::render_kb(doc);
        } else if (*bench) {
            using Clock = std::chrono::steady_clock;
            cct::ConstraintTree t = bench_tree(topology, bench_n, /*exact=*/true);
            cct::OrientedTree ot = cct::orient(t, t.events().front());
            auto t0 = Clock::now();
            auto alpha = cct::h1_alpha_all(ot);
            auto triples = cct::h2_triple_all(ot);
            auto t1 = Clock::now();
            cct::ConstraintTree g = bench_tree(topology, bench_n, /*exact=*/false);
            cct::OrientedTree og = cct::orient(g, g.events().front());
            auto t2 = Clock::now();
            cct::UpperLp u = cct::assemble_upper_lp(og);
            auto t3 = Clock::now();
            auto ms = [](auto a, auto b) {
                return std::chrono::duration_cast<std::chrono::milliseconds>(b - a).count();
            };
            std::cout << "topology " << topology << ", n " << bench_n << "\n"
                      << "exact propagation: " << ms(t0, t1) << " ms, root bounds ["
                      << cct::to_decimal(alpha[ot.root()]) << ", "
                      << cct::to_decimal(triples[ot.root()].alpha2) << "]\n"
                      << "lp construction: " << ms(t2, t3) << " ms, " << u.generated()
                      << " generated inequalities (" << u.j_row_count << " J + " << u.raw_alpha
                      << " alpha + " << u.raw_gamma << " gamma), " << u.lp.rows.size()
                      << " rows after subsumption\n";
        }
    } catch (const cct::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
