// surgery-check: parse, type-check and connectivity-check lattice-surgery programs.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <regex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <unistd.h>

#include "CLI11.hpp"
#include "json.hpp"
#include "qtl/archgraph.hpp"
#include "qtl/connectivity.hpp"
#include "qtl/interpreter.hpp"
#include "qtl/parser.hpp"
#include "qtl/printer.hpp"
#include "qtl/typecheck.hpp"

namespace {

using json = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

enum Exit {
    kAccepted = 0,
    kParseError = 1,
    kTypeError = 2,
    kViolation = 3,
    kStuck = 4,
    kResource = 5,
    kDisagreement = 70,
};

struct Settings {
    std::string subcommand;
    std::vector<std::string> files;
    std::string grid;
    std::string graph_file;
    std::string mode = "fast";
    bool json = false;
    bool commands_input = false;
    bool serialized = false;
    unsigned jobs = 1;
    std::uint64_t seed = 0;
    std::string script;
    bool has_script = false;
    qtl::InterpreterOptions interp;
};

struct Style {
    bool color = false;
    std::string paint(const std::string& text, const char* code) const {
        return color ? std::string("\033[") + code + "m" + text + "\033[0m" : text;
    }
    std::string error() const { return paint("error:", "1;31"); }
    std::string ok() const { return paint("ok", "1;32"); }
};

Style make_style() {
    const char* env = std::getenv("SURGERY_CHECK_COLOR");
    std::string v = env ? env : "auto";
    if (v == "always") return {true};
    if (v == "never") return {false};
    return {isatty(STDERR_FILENO) != 0};
}

struct Report {
    std::string file;
    std::string verdict;
    int exit_code = kAccepted;
    std::size_t command_size = 0;
    std::size_t serialized_size = 0;
    std::size_t query_count = 0;
    json timings = json::object();
    json violation;
    json error;
    json run;
    std::string out;   // stdout payload (text mode)
    std::string diag;  // stderr payload (text mode)
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

qtl::ArchGraph load_graph(const Settings& s) {
    if (!s.grid.empty()) {
        static const std::regex pattern(R"((\d+)x(\d+))");
        std::smatch m;
        if (!std::regex_match(s.grid, m, pattern)) {
            throw std::invalid_argument("--grid expects WxH, got `" + s.grid + "`");
        }
        return qtl::ArchGraph::grid(std::stoi(m[1]), std::stoi(m[2]));
    }
    try {
        return qtl::ArchGraph::from_edge_list(read_file(s.graph_file));
    } catch (const qtl::FormatError& e) {
        throw std::invalid_argument(s.graph_file + ": " + e.what());
    }
}

double elapsed_ms(Clock::time_point since) {
    return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

json span_json(const qtl::Span& s) { return {{"line", s.line}, {"column", s.column}}; }

json violation_json(const qtl::Violation& v) {
    json ends = json::array();
    for (const auto& l : v.endpoints) ends.push_back(l.name);
    return {{"kind", qtl::to_string(v.kind)},
            {"atom_index", v.atom_index},
            {"endpoints", ends},
            {"span", span_json(v.origin)},
            {"message", qtl::describe(v)}};
}

std::vector<int> parse_bits(const std::string& text) {
    std::vector<int> bits;
    for (char c : text) {
        if (c == '0' || c == '1') {
            bits.push_back(c - '0');
        } else if (c != ',' && c != ' ') {
            throw std::invalid_argument("--script expects a string of 0 and 1");
        }
    }
    return bits;
}

// Drops the "L:C: " prefix exception messages carry, since the location is printed separately.
std::string without_span(const std::string& what, const qtl::Span& span) {
    const std::string prefix = qtl::to_string(span) + ": ";
    return what.rfind(prefix, 0) == 0 ? what.substr(prefix.size()) : what;
}

void fail(Report& r, const Style& style, int code, const std::string& verdict, const std::string& where,
          const std::string& message) {
    r.exit_code = code;
    r.verdict = verdict;
    r.diag += where + ": " + style.error() + " " + message + "\n";
}

void check_commands(const Settings& s, const qtl::ArchGraph& g, const qtl::CommandSeq& effect,
                    Report& r, const Style& style) {
    const qtl::FreeSet all = qtl::FreeSet::all(g);
    r.command_size = qtl::seq_size(effect);
    {
        auto t = Clock::now();
        auto flat = qtl::serialize(effect);
        r.serialized_size = flat.size();
        r.query_count = qtl::to_query_script(g, flat, all).queries.size();
        r.timings["serialize_ms"] = elapsed_ms(t);
    }
    std::optional<qtl::CheckOutcome> naive, fast;
    if (s.mode == "naive" || s.mode == "both") {
        auto t = Clock::now();
        naive = qtl::check_naive(g, all, effect);
        r.timings["naive_ms"] = elapsed_ms(t);
    }
    if (s.mode == "fast" || s.mode == "both") {
        auto t = Clock::now();
        fast = qtl::check_fast(g, all, effect);
        r.timings["fast_ms"] = elapsed_ms(t);
    }
    if (naive && fast && naive->accepted != fast->accepted) {
        fail(r, style, kDisagreement, "disagreement", r.file,
             std::string("naive and fast checkers disagree (naive ") +
                 (naive->accepted ? "accepts" : "rejects") + ", fast " +
                 (fast->accepted ? "accepts" : "rejects") + ")");
        return;
    }
    const qtl::CheckOutcome& outcome = fast ? *fast : *naive;
    if (outcome.accepted) {
        r.verdict = "accepted";
        return;
    }
    const auto& v = *outcome.violation;
    r.violation = violation_json(v);
    fail(r, style, kViolation, "violation", r.file + ":" + qtl::to_string(v.origin), qtl::describe(v));
}

void run_program(const Settings& s, const qtl::ArchGraph& g, const qtl::Program& p, Report& r,
                 const Style& style) {
    std::unique_ptr<qtl::OutcomeSource> source;
    if (s.has_script) {
        source = std::make_unique<qtl::ScriptedOutcomes>(parse_bits(s.script));
    } else {
        source = std::make_unique<qtl::SeededOutcomes>(s.seed);
    }
    auto t = Clock::now();
    qtl::RunResult res = qtl::run(p, g, *source, s.interp);
    r.timings["run_ms"] = elapsed_ms(t);

    json labels = json::array();
    for (const auto& l : res.final_state.q.labels()) labels.push_back(l.name);
    r.run = {{"status", qtl::to_string(res.status)},
             {"steps", res.stats.steps},
             {"measurements", res.stats.measurements},
             {"message", res.message},
             {"live_qubits", labels},
             {"max_trace_deviation", res.stats.max_trace_deviation},
             {"max_hermiticity_deviation", res.stats.max_hermiticity_deviation}};
    if (res.stuck) {
        json locs = json::array();
        for (const auto& l : res.stuck->locations) locs.push_back(l.name);
        r.run["stuck"] = {{"rule", res.stuck->rule}, {"locations", locs}};
    }
    if (s.interp.trace) {
        r.run["trace"] = res.trace;
        for (const auto& line : res.trace) r.out += line + "\n";
    }

    switch (res.status) {
        case qtl::RunStatus::Terminated:
            r.verdict = "terminated";
            r.out += "terminated in " + std::to_string(res.stats.steps) + " steps: " + res.message + "\n";
            break;
        case qtl::RunStatus::Stuck:
            fail(r, style, kStuck, "stuck", r.file, res.message);
            break;
        case qtl::RunStatus::FuelExhausted:
            fail(r, style, kResource, "fuel-exhausted", r.file, res.message);
            break;
        case qtl::RunStatus::ResourceExceeded:
            fail(r, style, kResource, "resource-exceeded", r.file, res.message);
            break;
        case qtl::RunStatus::PolicyRejected:
            fail(r, style, kResource, "policy-rejected", r.file, res.message);
            break;
    }
}

Report process(const Settings& s, const qtl::ArchGraph& g, const std::string& file, const Style& style) {
    Report r;
    r.file = file;
    std::string source;
    try {
        source = read_file(file);
    } catch (const std::exception& e) {
        fail(r, style, kResource, "usage-error", file, e.what());
        r.error = {{"kind", "io"}, {"message", e.what()}};
        return r;
    }

    qtl::CommandSeq effect;
    qtl::Program program;
    if (s.commands_input) {
        try {
            effect = qtl::parse_commands(source);
            for (const auto& l : qtl::serialize(effect)) {
                auto check = [&](const qtl::Location& loc) {
                    if (!g.contains(loc)) throw std::invalid_argument("unknown location " + loc.name);
                };
                std::visit(
                    [&](const auto& n) {
                        using T = std::decay_t<decltype(n)>;
                        if constexpr (std::is_same_v<T, qtl::cmd::Merge<qtl::Location>>) {
                            check(n.first);
                            check(n.second);
                        } else if constexpr (std::is_same_v<T, qtl::cmd::Alloc<qtl::Location>> ||
                                             std::is_same_v<T, qtl::cmd::Free<qtl::Location>>) {
                            check(n.loc);
                        }
                    },
                    l.node);
            }
        } catch (const std::invalid_argument& e) {
            fail(r, style, kParseError, "parse-error", file, e.what());
            r.error = {{"kind", "parse"}, {"message", e.what()}};
            return r;
        }
    } else {
        auto t = Clock::now();
        try {
            program = qtl::parse_program(source);
        } catch (const qtl::ParseError& e) {
            r.timings["parse_ms"] = elapsed_ms(t);
            fail(r, style, kParseError, "parse-error", file + ":" + qtl::to_string(e.span()),
                 without_span(e.what(), e.span()));
            r.error = {{"kind", "parse"}, {"span", span_json(e.span())}, {"message", e.what()}};
            return r;
        }
        r.timings["parse_ms"] = elapsed_ms(t);

        t = Clock::now();
        try {
            effect = qtl::typecheck_program(program, g).effect;
        } catch (const qtl::TypeError& e) {
            r.timings["typecheck_ms"] = elapsed_ms(t);
            fail(r, style, kTypeError, "type-error", file + ":" + qtl::to_string(e.span()),
                 without_span(e.what(), e.span()));
            r.error = {{"kind", qtl::to_string(e.kind())}, {"span", span_json(e.span())},
                       {"message", e.what()}};
            return r;
        }
        r.timings["typecheck_ms"] = elapsed_ms(t);
    }

    if (s.subcommand == "check") {
        check_commands(s, g, effect, r, style);
        if (r.exit_code == kAccepted) r.diag += file + ": " + style.ok() + "\n";
    } else if (s.subcommand == "emit-commands") {
        r.command_size = qtl::seq_size(effect);
        r.out = qtl::format_commands(s.serialized ? qtl::serialize(effect) : effect);
        r.verdict = "emitted";
    } else if (s.subcommand == "emit-queries") {
        auto flat = qtl::serialize(effect);
        auto script = qtl::to_query_script(g, flat, qtl::FreeSet::all(g));
        r.command_size = qtl::seq_size(effect);
        r.serialized_size = flat.size();
        r.query_count = script.queries.size();
        r.out = qtl::format_queries(g, script);
        r.verdict = "emitted";
    } else if (s.subcommand == "run") {
        if (s.commands_input) {
            fail(r, style, kResource, "usage-error", file, "run needs a program, not a command dump");
            return r;
        }
        try {
            run_program(s, g, program, r, style);
        } catch (const std::invalid_argument& e) {
            fail(r, style, kResource, "usage-error", file, e.what());
        }
    }
    return r;
}

json to_json(const Report& r) {
    json j = {{"file", r.file},
              {"verdict", r.verdict},
              {"exit_code", r.exit_code},
              {"command_size", r.command_size},
              {"serialized_size", r.serialized_size},
              {"query_count", r.query_count},
              {"timings_ms", r.timings},
              {"violation", r.violation},
              {"error", r.error},
              {"run", r.run}};
    if (!r.out.empty() && r.verdict == "emitted") j["output"] = r.out;
    return j;
}

void add_common(CLI::App* cmd, Settings& s) {
    cmd->add_option("files", s.files, "Program files")->required()->check(CLI::ExistingFile);
    auto* grid = cmd->add_option("--grid", s.grid, "Grid architecture WxH (cells c<x>_<y>)");
    auto* graph = cmd->add_option("--graph", s.graph_file, "Edge-list architecture file")
                      ->check(CLI::ExistingFile);
    grid->excludes(graph);
    cmd->add_flag("--json", s.json, "JSON Lines output on stdout");
    cmd->add_flag("--commands", s.commands_input, "Inputs are command dumps, not programs");
    cmd->add_option("--jobs,-j", s.jobs, "Files processed concurrently")
        ->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
    Settings s;
    CLI::App app{"Type and connectivity checker for lattice-surgery programs", "surgery-check"};
    app.require_subcommand(1);

    auto* check = app.add_subcommand("check", "Type-check and verify merge connectivity");
    add_common(check, s);
    check->add_option("--mode", s.mode, "Connectivity checker")
        ->check(CLI::IsMember({"naive", "fast", "both"}));

    auto* run = app.add_subcommand("run", "Execute with the reference interpreter");
    add_common(run, s);
    run->add_option("--seed", s.seed, "Seed for measurement outcomes");
    run->add_option("--script", s.script, "Measurement outcomes to replay, e.g. 0110");
    run->add_option("--fuel", s.interp.fuel, "Step budget");
    run->add_option("--max-qubits", s.interp.max_qubits, "Live qubit cap");
    run->add_flag("--trace", s.interp.trace, "Print every rule fired");

    auto* emit_commands = app.add_subcommand("emit-commands", "Print the command sequence");
    add_common(emit_commands, s);
    emit_commands->add_flag("--serialized", s.serialized, "Print the flattened sequence");

    auto* emit_queries = app.add_subcommand("emit-queries", "Print the connectivity query script");
    add_common(emit_queries, s);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : kResource;
    }
    s.subcommand = app.get_subcommands().front()->get_name();
    s.has_script = run->parsed() && run->count("--script") > 0;

    const Style style = make_style();
    if (s.grid.empty() == s.graph_file.empty()) {
        std::cerr << style.error() << " exactly one of --grid or --graph is required\n";
        return kResource;
    }
    qtl::ArchGraph g;
    try {
        g = load_graph(s);
    } catch (const std::exception& e) {
        std::cerr << style.error() << " " << e.what() << "\n";
        return kResource;
    }

    std::vector<Report> reports(s.files.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < s.files.size(); i = next++) {
            try {
                reports[i] = process(s, g, s.files[i], style);
            } catch (const std::exception& e) {
                reports[i].file = s.files[i];
                fail(reports[i], style, kResource, "internal-error", s.files[i], e.what());
            }
        }
    };
    const unsigned threads = std::min<unsigned>(s.jobs, static_cast<unsigned>(s.files.size()));
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    int code = kAccepted;
    for (const auto& r : reports) {
        if (s.json) {
            std::cout << to_json(r).dump() << "\n";
        } else {
            std::cout << r.out;
            std::cerr << r.diag;
        }
        code = std::max(code, r.exit_code);
    }
    return code;
}
