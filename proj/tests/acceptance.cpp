// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

#include <unistd.h>

#include "magicdl/cli.hpp"
#include "magicdl/depgraph.hpp"
#include "magicdl/magic.hpp"
#include "magicdl/parser.hpp"
#include "magicdl/pipeline.hpp"
#include "magicdl/subsumption.hpp"
#include "support/oracles.hpp"
#include "support/programs.hpp"

using namespace magicdl;
using namespace magicdl::testing;

namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) { return std::chrono::duration<double>(Clock::now() - start).count(); }

struct Verdict {
    bool pass = true;
    std::string detail;
};

int failures = 0;

void report(int number, const std::string& title, const std::function<Verdict()>& check) {
    auto start = Clock::now();
    Verdict verdict;
    try {
        verdict = check();
    } catch (const std::exception& e) {
        verdict = {false, std::string("exception: ") + e.what()};
    }
    char elapsed[32];
    std::snprintf(elapsed, sizeof elapsed, "%.2fs", seconds_since(start));
    std::cout << (verdict.pass ? "PASS" : "FAIL") << " criterion " << number << ": " << title << " (" << verdict.detail
              << "; " << elapsed << ")" << std::endl;
    if (!verdict.pass) ++failures;
}

class TempFile {
public:
    explicit TempFile(const std::string& text) {
        static int counter = 0;
        path_ = fs::temp_directory_path() /
                ("magicdl_acceptance_" + std::to_string(::getpid()) + "_" + std::to_string(counter++) + ".dl");
        std::ofstream(path_) << text;
    }
    ~TempFile() { fs::remove(path_); }
    std::string path() const { return path_.string(); }

private:
    fs::path path_;
};

const char* kR4ToR10 =
    "m#c#bf(0).\n"
    "m#a#bf(X) :- m#c#bf(X).\n"
    "m#b#b(Y) :- m#c#bf(X), a(X,Y).\n"
    "m#b#b(X) :- m#a#bf(X), edb(X,Y).\n"
    "a(X,Y) :- m#a#bf(X), edb(X,Y), b(X).\n"
    "b(X) :- m#b#b(X), edb(X,Y).\n"
    "c(X,Y) :- m#c#bf(X), a(X,Y), b(Y).\n";

const char* kR20ToR27 =
    "m#c#bf(0).\n"
    "m#a#bf(X) :- m#c#bf(X).\n"
    "m#b#f :- m#c#bf(X).\n"
    "m#b#b(X) :- m#a#bf(X), edb(X,Y).\n"
    "a(X,Y) :- m#a#bf(X), edb(X,Y), b(X).\n"
    "b(X) :- m#b#f, edb(X,Y).\n"
    "b(X) :- m#b#b(X), edb(X,Y).\n"
    "c(X,Y) :- m#c#bf(X), a(X,Y), b(Y).\n";

const char* kR20ToR27FullFree =
    "m#c#bf(0).\n"
    "m#a#bf(X) :- m#c#bf(X).\n"
    "m#b#f :- m#c#bf(X).\n"
    "m#b#f :- m#a#bf(X), edb(X,Y).\n"
    "a(X,Y) :- m#a#bf(X), edb(X,Y), b(X).\n"
    "b(X) :- m#b#f, edb(X,Y).\n"
    "c(X,Y) :- m#c#bf(X), a(X,Y), b(Y).\n";

// cmd_rewrite output, re-read with magic names, compared to `golden`.
bool rewrite_matches(const std::string& path, RewriteMode mode, bool fullfree, const char* golden,
                     std::string& detail) {
    PipelineConfig config;
    config.rewrite = mode;
    config.full_free = fullfree;
    std::ostringstream out, err;
    if (cmd_rewrite({path}, "c(0,Y)", config, out, err) != 0) {
        detail += "cmd_rewrite failed: " + err.str();
        return false;
    }
    Program printed;
    parse_magic_into(printed, out.str());
    Program expected = printed.empty_like();
    parse_magic_into(expected, golden);
    if (rule_keys(printed) == rule_keys(expected)) return true;
    detail += "mismatch for " + std::string(to_string(mode)) + ":\n" + out.str();
    return false;
}

Verdict criterion1() {
    auto start = Clock::now();
    TempFile file(kPi1);
    std::string detail;
    bool ok = rewrite_matches(file.path(), RewriteMode::ms, true, kR4ToR10, detail);
    ok &= rewrite_matches(file.path(), RewriteMode::ms_rs, false, kR20ToR27, detail);
    ok &= rewrite_matches(file.path(), RewriteMode::ms_rs, true, kR20ToR27FullFree, detail);
    auto elapsed = seconds_since(start);
    if (elapsed >= 1.0) {
        ok = false;
        detail += "took " + std::to_string(elapsed) + "s";
    }
    if (ok) detail = "ms = r4..r10, ms-rs = r20..r27, ms-rs + full-free = folded trace";
    return {ok, detail};
}

Verdict criterion2() {
    auto program = parse_program(kPi1);
    auto query = parse_query("c(0,Y)", *program.symbols);
    auto a = *program.symbols->find_predicate("a", 2), b = *program.symbols->find_predicate("b", 1);

    auto classic = ms(query, program).program;
    bool merged = sccs(DependencyGraph(classic)).same_component(a, b);

    auto restricted = ms_rs(query, program).program;
    auto partition = sccs(DependencyGraph(restricted));
    bool singletons = true;
    for (auto p : program.predicates())
        for (auto q : program.predicates())
            if (p != q && partition.same_component(p, q)) singletons = false;

    std::size_t violations = 0;
    for (const auto& pool : random_pool(500, 2)) {
        auto result = ms_rs(pool.query, pool.program);
        if (!components_preserved(pool.program, result.program) || result.monitor_broken) ++violations;
    }
    std::ostringstream detail;
    detail << "ms merges a,b: " << (merged ? "yes" : "no") << "; ms-rs singletons: " << (singletons ? "yes" : "no")
           << "; pool violations: " << violations << "/500";
    return {merged && singletons && violations == 0, detail.str()};
}

Verdict criterion3() {
    bool ok = true;
    std::ostringstream detail;
    for (auto [name, text] : {std::pair{"pi2", kPi2}, std::pair{"pi3", kPi3}}) {
        auto program = parse_program(text);
        auto query = parse_query("c(0,Y)", *program.symbols);
        bool restricted = is_stratified(DependencyGraph(ms_rs(query, program).program));
        bool classic = is_stratified(DependencyGraph(ms(query, program).program));
        detail << name << ": ms-rs " << (restricted ? "stratified" : "UNSTRATIFIED") << ", ms "
               << (classic ? "stratified" : "unstratified") << "; ";
        ok &= restricted && !classic;
    }
    return {ok, detail.str()};
}

Verdict criterion4() {
    struct Variant {
        const char* name;
        RewriteMode mode;
        bool full_free;
        bool subsumption;
    };
    const std::vector<Variant> variants{{"ms", RewriteMode::ms, false, false},
                                        {"ms-rs", RewriteMode::ms_rs, false, false},
                                        {"ms-rs+ff", RewriteMode::ms_rs, true, false},
                                        {"ms-rs+ff+sub", RewriteMode::ms_rs, true, true}};
    std::size_t mismatches = 0, skipped = 0, runs = 0;
    std::string first;
    for (const auto& pool : random_pool(500, 4)) {
        PipelineConfig none;
        none.rewrite = RewriteMode::none;
        auto expected = solve(pool.program, pool.query, none).answers;
        for (const auto& v : variants) {
            PipelineConfig config;
            config.rewrite = v.mode;
            config.full_free = v.full_free;
            config.subsumption = v.subsumption;
            try {
                ++runs;
                if (solve(pool.program, pool.query, config).answers == expected) continue;
            } catch (const UnstratifiableError&) {
                if (v.mode == RewriteMode::ms) {
                    ++skipped;
                    continue;
                }
            }
            ++mismatches;
            if (first.empty()) first = std::string(v.name) + " on seed " + std::to_string(pool.seed);
        }
    }
    std::ostringstream detail;
    detail << runs << " runs, " << mismatches << " mismatches, " << skipped << " unstratified ms outputs skipped";
    if (!first.empty()) detail << ", first: " << first;
    return {mismatches == 0, detail.str()};
}

Verdict criterion5() {
    Program program;
    parse_magic_into(program,
                     "m#a#b(0).\n"
                     "m#a#f :- m#a#b(X).\n"
                     "a(X) :- m#a#b(X), b(X), a(Y), not c(X,Y).\n"
                     "a(X) :- m#a#f, b(X), a(Y), not c(X,Y).\n");
    auto folded = full_free(program);
    Program expected = program.empty_like();
    parse_magic_into(expected, "m#a#f.\na(X) :- m#a#f, b(X), a(Y), not c(X,Y).\n");
    bool ok = folded.rules.size() == 2 && rule_keys(folded) == rule_keys(expected);
    return {ok, ok ? "{m#a#f., r19}" : "got:\n" + render(folded)};
}

Verdict criterion6() {
    std::mt19937_64 rng(6);
    std::size_t pruned = 0, false_prunes = 0;
    for (int i = 0; i < 10000; ++i) {
        auto pair = random_rule_pair(rng);
        if (rule_hash(pair.r()).admits(rule_hash(pair.r_prime()))) continue;
        ++pruned;
        if (subsumes(pair.r(), pair.r_prime())) ++false_prunes;
    }

    Program example;
    auto& s = *example.symbols;
    s.intern_predicate("unused", 0);
    s.intern_predicate("q", 1);
    s.intern_predicate("p", 2);
    s.intern_predicate("t", 1);
    s.intern_symbol("unused");
    s.intern_symbol("a");
    parse_into(example, "q(X) :- p(X,Y).\nq(X) :- p(X,a).\nq(X) :- p(X,Y), t(X).\n");
    HashLayout two_bits{{2, 2, 2, 2, 2, 2}};
    auto h = rule_hash(example.rules[0], two_bits);
    auto h1 = rule_hash(example.rules[1], two_bits);
    auto h2 = rule_hash(example.rules[2], two_bits);
    bool worked = h.to_bit_string() == "01 00 10 00 00 00" && h1.to_bit_string() == "01 00 10 01 00 00" &&
                  h2.to_bit_string() == "01 00 11 00 00 00" && (h1.bits & h2.bits) != h1.bits &&
                  (h.bits & h1.bits) == h.bits;

    std::ostringstream detail;
    detail << pruned << " pairs pruned, " << false_prunes << " of them subsumed; worked example "
           << (worked ? "bit-exact" : "MISMATCH");
    return {false_prunes == 0 && worked, detail.str()};
}

Verdict criterion7() {
    std::mt19937_64 rng(7);
    std::size_t disagreements = 0, positives = 0;
    for (int i = 0; i < 2000; ++i) {
        auto pair = random_rule_pair(rng);
        bool expected = brute_force_subsumes(pair.r(), pair.r_prime());
        positives += expected;
        if (subsumes(pair.r(), pair.r_prime()) != expected) ++disagreements;
    }
    std::ostringstream detail;
    detail << "2000 pairs, " << positives << " subsumed, " << disagreements << " disagreements";
    return {disagreements == 0, detail.str()};
}

Verdict criterion8() {
    PoolOptions options;
    options.max_constant = 3;  // constants 0..3
    options.max_facts = 12;
    std::size_t verified = 0, rejected = 0, inconclusive = 0;
    for (const auto& pool : random_pool(200, 8, options)) {
        auto verdict = check_stable_model(pool.program, stable_model(pool.program), 16, 50000);
        if (!verdict)
            ++inconclusive;
        else if (*verdict)
            ++verified;
        else
            ++rejected;
    }

    auto shop = parse_program(kShop);
    auto model = stable_model(shop).render(*shop.symbols);
    std::vector<std::string> expected{"cancelled(o2)", "item(o1,i1,20)", "item(o1,i2,20)", "order(o1)", "order(o2)",
                                      "total_cost(40)"};
    bool shop_ok = model == expected;

    std::ostringstream detail;
    detail << verified << " verified, " << rejected << " rejected, " << inconclusive
           << " over the oracle's size guard; shop " << (shop_ok ? "= facts + total_cost(40)" : "WRONG");
    return {rejected == 0 && inconclusive == 0 && verified == 200 && shop_ok, detail.str()};
}

double solve_seconds(const Program& program, const Atom& query, RewriteMode mode) {
    PipelineConfig config;
    config.rewrite = mode;
    auto start = Clock::now();
    solve(program, query, config);
    return seconds_since(start);
}

Verdict criterion9() {
    const std::int64_t base = 100000;
    std::ostringstream detail;
    bool ok = true;
    double slowest = 0;
    detail << "pi1 ms-rs/ms:";
    for (std::int64_t size = 1; size <= 5; ++size) {
        auto program = parse_program(generate(Family::pi1, size, base));
        auto query = parse_query("c(0,Y)", *program.symbols);
        // One warm-up each, then best of seven, alternating so both modes see the same heap state.
        solve_seconds(program, query, RewriteMode::ms);
        solve_seconds(program, query, RewriteMode::ms_rs);
        double t_ms = 1e18, t_rs = 1e18;
        for (int round = 0; round < 7; ++round) {
            t_ms = std::min(t_ms, solve_seconds(program, query, RewriteMode::ms));
            t_rs = std::min(t_rs, solve_seconds(program, query, RewriteMode::ms_rs));
        }
        slowest = std::max({slowest, t_ms, t_rs});
        char buffer[64];
        std::snprintf(buffer, sizeof buffer, " %.2f", t_rs / t_ms);
        detail << buffer;
        if (t_rs > 1.05 * t_ms) ok = false;
    }

    for (auto [family, name] : {std::pair{Family::pi2, "pi2"}, std::pair{Family::pi3, "pi3"}}) {
        TempFile file(generate(family, 1, base));
        PipelineConfig config;
        std::ostringstream out, err;
        auto start = Clock::now();
        int code = cmd_solve({file.path()}, "c(0,Y)", config, out, err);
        slowest = std::max(slowest, seconds_since(start));
        detail << "; " << name << " ms-rs exit " << code;
        ok &= code == 0;
        if (family == Family::pi2) {
            config.rewrite = RewriteMode::ms;
            std::ostringstream out2, err2;
            int rejected = cmd_solve({file.path()}, "c(0,Y)", config, out2, err2);
            detail << ", ms exit " << rejected;
            ok &= rejected == 1 && err2.str().find("not stratified") != std::string::npos;
        }
    }
    char buffer[64];
    std::snprintf(buffer, sizeof buffer, "; slowest run %.2fs", slowest);
    detail << buffer;
    ok &= slowest <= 60.0;
    return {ok, detail.str()};
}

// The prefilter as defined, written out independently of rule_hash.
std::uint64_t reference_hash(const Rule& rule) {
    std::uint64_t head_p = 0, head_c = 0, pos_p = 0, pos_c = 0, neg_p = 0, neg_c = 0;
    auto constants = [](const std::vector<Term>& terms, std::uint64_t& field) {
        for (Term t : terms)
            if (t.is_constant()) field |= index_of(t.constant_id());
    };
    head_p |= index_of(rule.head.predicate);
    constants(rule.head.terms, head_c);
    for (const auto* literal : rule.positive_body()) {
        pos_p |= index_of(literal->atom.predicate);
        constants(literal->atom.terms, pos_c);
    }
    for (const auto* aggregate : rule.aggregates()) {
        pos_p |= index_of(aggregate->inner.predicate);
        constants(aggregate->inner.terms, pos_c);
        constants(aggregate->head_terms, pos_c);
        constants({aggregate->guard}, pos_c);
    }
    for (const auto* literal : rule.negative_body()) {
        neg_p |= index_of(literal->atom.predicate);
        constants(literal->atom.terms, neg_c);
    }
    return (head_p & 0xff) << 56 | (head_c & 0xff) << 48 | (pos_p & 0xffff) << 32 | (pos_c & 0xffff) << 16 |
           (neg_p & 0xff) << 8 | (neg_c & 0xff);
}

Verdict criterion10() {
    std::mt19937_64 rng(10);
    std::size_t programs = 0, mismatched = 0, false_prunes = 0;
    SubsumptionStats total;
    for (int n = 0; n < 40; ++n) {
        // Rules drawn from random pairs, so that many are related.
        Program corpus;
        for (int k = 0; k < 12; ++k) {
            auto pair = random_rule_pair(rng);
            parse_into(corpus, render(pair.program));
        }
        const auto& rules = corpus.rules;
        bool has_fact = std::any_of(rules.begin(), rules.end(), [](const Rule& r) { return r.is_fact(); });
        if (has_fact) continue;
        ++programs;

        SubsumptionStats expected;
        std::vector<bool> removed(rules.size(), false);
        for (std::size_t i = 0; i < rules.size(); ++i) {
            if (removed[i]) continue;
            for (std::size_t j = 0; j < rules.size(); ++j) {
                if (i == j || removed[j]) continue;
                ++expected.candidates;
                auto hi = reference_hash(rules[i]), hj = reference_hash(rules[j]);
                bool oracle = brute_force_subsumes(rules[i], rules[j]);
                if ((hi & hj) != hi) {
                    ++expected.hash_pruned;
                    false_prunes += oracle;
                    continue;
                }
                ++expected.checks;
                if (oracle) {
                    removed[j] = true;
                    ++expected.removed;
                }
            }
        }

        auto actual = eliminate_subsumed(corpus).stats;
        if (actual.to_key_values() != expected.to_key_values()) ++mismatched;
        total.candidates += actual.candidates;
        total.hash_pruned += actual.hash_pruned;
        total.checks += actual.checks;
        total.removed += actual.removed;
    }
    std::ostringstream detail;
    detail << programs << " corpora, " << mismatched << " counter mismatches, " << false_prunes
           << " false prunes; candidates=" << total.candidates << " hash_pruned=" << total.hash_pruned
           << " checks=" << total.checks << " removed=" << total.removed;
    return {mismatched == 0 && false_prunes == 0 && programs >= 30, detail.str()};
}

}  // namespace

int main() {
    report(1, "golden rewriting of Pi1", criterion1);
    report(2, "cycle prevention", criterion2);
    report(3, "stratification closure", criterion3);
    report(4, "query equivalence on the random pool", criterion4);
    report(5, "full-free golden", criterion5);
    report(6, "hash prefilter never prunes a subsumed pair", criterion6);
    report(7, "subsumption agrees with brute force", criterion7);
    report(8, "stable-model oracle", criterion8);
    report(9, "desk-scale timing shape", criterion9);
    report(10, "subsumption counters on a synthetic corpus", criterion10);
    std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
    return failures == 0 ? 0 : 1;
}
