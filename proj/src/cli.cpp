#include "magicdl/cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "magicdl/depgraph.hpp"
#include "magicdl/parser.hpp"

namespace magicdl {

namespace {

struct Failure {
    int code;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::ostringstream text;
    text << in.rdbuf();
    return text.str();
}

// Loads, checks safety and parses the query; reports and throws Failure.
std::pair<Program, Atom> load(const std::vector<std::string>& files, const std::string& query_text,
                              std::ostream& err) {
    Program program;
    for (const auto& path : files) {
        try {
            parse_into(program, read_file(path));
        } catch (const ParseError& e) {
            err << path << ":" << e.line() << ":" << e.column() << ": error: " << e.message();
            if (!e.token().empty()) err << " near '" << e.token() << "'";
            err << "\n";
            throw Failure{2};
        } catch (const std::runtime_error& e) {
            err << "error: " << e.what() << "\n";
            throw Failure{2};
        }
    }
    Atom query;
    try {
        query = parse_query(query_text, *program.symbols);
    } catch (const ParseError& e) {
        err << "query:" << e.column() << ": error: " << e.message() << "\n";
        throw Failure{2};
    }

    bool unsafe = false;
    for (const auto& rule : program.rules) {
        auto verdict = is_safe(rule);
        for (const auto& v : verdict.unsafe) {
            err << "error: unsafe " << (v.scope == VariableScope::global ? "global" : "local") << " variable " << v.name
                << " in " << render_rule(rule, *program.symbols) << "\n";
            unsafe = true;
        }
    }
    if (unsafe) throw Failure{1};
    return {std::move(program), std::move(query)};
}

void print_times(const StageTimes& times, std::ostream& err) {
    err << std::fixed << std::setprecision(3) << "rewrite_ms=" << times.rewrite_ms << "\n"
        << "subsumption_ms=" << times.subsumption_ms << "\n"
        << "evaluation_ms=" << times.evaluation_ms << "\n";
}

template <class F>
int guarded(std::ostream& err, F&& body) {
    try {
        return body();
    } catch (const Failure& f) {
        return f.code;
    } catch (const UnknownQueryPredicate& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const UnstratifiableError& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const EvalError& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace

int cmd_solve(const std::vector<std::string>& files, const std::string& query_text, const PipelineConfig& config,
              std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        auto [program, query] = load(files, query_text, err);
        auto prepared = prepare(program, query, config);
        if (config.dump_rewritten) err << render(prepared.program);
        if (config.dump_depgraph) err << DependencyGraph(prepared.program).to_dot(*prepared.program.symbols);

        auto start = std::chrono::steady_clock::now();
        auto answers = answer(query, prepared.program);
        prepared.times.evaluation_ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
        prepared.stats.answers = answers.size();

        for (const auto& line : format_answers(query, answers, *program.symbols)) out << line << "\n";
        if (config.stats) {
            out << prepared.stats.to_key_values();
            print_times(prepared.times, err);
        }
        return 0;
    });
}

int cmd_rewrite(const std::vector<std::string>& files, const std::string& query_text, const PipelineConfig& config,
                std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        auto [program, query] = load(files, query_text, err);
        auto prepared = prepare(program, query, config);
        out << render(prepared.program);
        if (config.dump_depgraph) err << DependencyGraph(prepared.program).to_dot(*prepared.program.symbols);
        if (config.stats) {
            out << prepared.stats.to_key_values();
            print_times(prepared.times, err);
        }
        return 0;
    });
}

int cmd_gen(const std::string& family, std::int64_t size, std::int64_t base, std::ostream& out, std::ostream& err) {
    auto parsed = parse_family(family);
    if (!parsed) {
        err << "error: unknown family '" << family << "' (expected pi1, pi2 or pi3)\n";
        return 2;
    }
    if (size < 1) {
        err << "error: size must be at least 1\n";
        return 2;
    }
    if (base < 0) {
        err << "error: base must be non-negative\n";
        return 2;
    }
    out << generate(*parsed, size, base);
    return 0;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Datalog engine with magic sets rewriting"};
    app.require_subcommand(0, 1);

    std::vector<std::string> gen_args;
    std::int64_t base = 1000000;
    app.add_option("--gen", gen_args, "Generate a benchmark family: FAMILY SIZE")->expected(2);
    app.add_option("--base", base, "Facts per size unit for --gen");

    std::vector<std::string> files;
    std::string query;
    std::string rewrite = "ms-rs";
    std::string sips = "linked";
    bool no_fullfree = false, no_subsumption = false;
    PipelineConfig config;

    auto add_pipeline_flags = [&](CLI::App* sub) {
        sub->add_option("files", files, "Program files")->required()->check(CLI::ExistingFile);
        sub->add_option("-q,--query", query, "Query atom, e.g. \"c(0,Y)\"")->required();
        sub->add_option("--rewrite", rewrite, "none, ms or ms-rs")
            ->check(CLI::IsMember({"none", "ms", "ms-rs"}));
        sub->add_flag("--no-fullfree", no_fullfree, "Skip the full-free pass");
        sub->add_flag("--no-subsumption", no_subsumption, "Skip subsumed-rule elimination");
        sub->add_flag("--stats", config.stats, "Print counters (stdout) and stage times (stderr)");
        sub->add_flag("--dump-rewritten", config.dump_rewritten, "Print the evaluated program to stderr");
        sub->add_flag("--dump-depgraph", config.dump_depgraph, "Print its dependency graph (DOT) to stderr");
        sub->add_option("--sips", sips, "linked or textual")->check(CLI::IsMember({"linked", "textual"}));
    };
    auto* solve = app.add_subcommand("solve", "Answer a query");
    add_pipeline_flags(solve);
    auto* rewrite_cmd = app.add_subcommand("rewrite", "Print the rewritten program");
    add_pipeline_flags(rewrite_cmd);

    std::string family;
    std::int64_t size = 0;
    auto* gen = app.add_subcommand("gen", "Print a benchmark program");
    gen->add_option("family", family, "pi1, pi2 or pi3")->required();
    gen->add_option("size", size, "Size multiplier")->required();
    gen->add_option("--base", base, "Facts per size unit");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    config.rewrite = *parse_rewrite_mode(rewrite);
    config.full_free = !no_fullfree;
    config.subsumption = !no_subsumption;
    config.sips = sips == "textual" ? SipsStrategy::textual : SipsStrategy::linked;

    if (!gen_args.empty()) {
        std::int64_t n = 0;
        try {
            n = std::stoll(gen_args[1]);
        } catch (const std::exception&) {
            err << "error: size must be an integer\n";
            return 2;
        }
        return cmd_gen(gen_args[0], n, base, out, err);
    }
    if (*solve) return cmd_solve(files, query, config, out, err);
    if (*rewrite_cmd) return cmd_rewrite(files, query, config, out, err);
    if (*gen) return cmd_gen(family, size, base, out, err);
    out << app.help();
    return 2;
}

}  // namespace magicdl
