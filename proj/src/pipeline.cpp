#include "magicdl/pipeline.hpp"

#include <chrono>
#include <sstream>
#include <stdexcept>

namespace magicdl {

std::string_view to_string(RewriteMode mode) {
    switch (mode) {
        case RewriteMode::none: return "none";
        case RewriteMode::ms: return "ms";
        case RewriteMode::ms_rs: return "ms-rs";
    }
    return "?";
}

std::optional<RewriteMode> parse_rewrite_mode(std::string_view text) {
    if (text == "none") return RewriteMode::none;
    if (text == "ms") return RewriteMode::ms;
    if (text == "ms-rs" || text == "ms_rs") return RewriteMode::ms_rs;
    return std::nullopt;
}

std::string PipelineStats::to_key_values() const {
    std::ostringstream out;
    out << "input_rules=" << input_rules << "\n"
        << rewrite.to_key_values() << "full_free_removed=" << full_free_removed << "\n"
        << subsumption.to_key_values() << "output_rules=" << output_rules << "\n"
        << "answers=" << answers << "\n";
    return out.str();
}

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

}  // namespace

Prepared prepare(const Program& program, const Atom& query, const PipelineConfig& config) {
    Prepared out{program.empty_like(), {}, {}};
    out.stats.input_rules = program.rules.size();
    if (config.rewrite == RewriteMode::none) {
        out.program = program;
        out.stats.output_rules = program.rules.size();
        return out;
    }

    auto start = Clock::now();
    RewriteOptions options;
    options.sips = config.sips;
    auto rewritten = config.rewrite == RewriteMode::ms ? ms(query, program, options) : ms_rs(query, program, options);
    out.program = std::move(rewritten.program);
    out.stats.rewrite = rewritten.stats;
    if (config.full_free) {
        auto before = out.program.rules.size();
        out.program = full_free(std::move(out.program));
        out.stats.full_free_removed = before - out.program.rules.size();
    }
    out.times.rewrite_ms = since(start);

    if (config.subsumption) {
        start = Clock::now();
        auto reduced = eliminate_subsumed(std::move(out.program));
        out.program = std::move(reduced.program);
        out.stats.subsumption = reduced.stats;
        out.times.subsumption_ms = since(start);
    }
    out.stats.output_rules = out.program.rules.size();
    return out;
}

Solution solve(const Program& program, const Atom& query, const PipelineConfig& config) {
    Solution out{prepare(program, query, config), {}};
    auto start = Clock::now();
    out.answers = answer(query, out.prepared.program);
    out.prepared.times.evaluation_ms = since(start);
    out.prepared.stats.answers = out.answers.size();
    return out;
}

std::optional<Family> parse_family(std::string_view text) {
    if (text == "pi1") return Family::pi1;
    if (text == "pi2") return Family::pi2;
    if (text == "pi3") return Family::pi3;
    return std::nullopt;
}

std::string generate(Family family, std::int64_t size, std::int64_t base) {
    if (size < 1) throw std::invalid_argument("size must be at least 1");
    if (base < 0) throw std::invalid_argument("base must be non-negative");
    std::ostringstream out;
    switch (family) {
        case Family::pi1: out << "a(X,Y) :- edb(X,Y), b(X).\n"; break;
        case Family::pi2: out << "a(X,Y) :- edb(X,Y), not b(X).\n"; break;
        case Family::pi3: out << "a(X,Y) :- edb(X,Y), #sum{1 : b(X)} = 0.\n"; break;
    }
    out << "b(X) :- edb(X,Y).\n"
        << "c(X,Y) :- a(X,Y), b(Y).\n"
        << "edb(0.." << base * size << ").\n";
    return out.str();
}

}  // namespace magicdl
