#pragma once

// parse -> rewrite -> full-free -> subsumption -> evaluate -> answer.

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "magicdl/core.hpp"
#include "magicdl/evaluator.hpp"
#include "magicdl/magic.hpp"
#include "magicdl/subsumption.hpp"

namespace magicdl {

enum class RewriteMode { none, ms, ms_rs };

std::string_view to_string(RewriteMode mode);
std::optional<RewriteMode> parse_rewrite_mode(std::string_view text);

struct PipelineConfig {
    RewriteMode rewrite = RewriteMode::ms_rs;
    // Only used when rewrite != none.
    bool full_free = true;
    bool subsumption = true;
    bool stats = false;
    bool dump_rewritten = false;
    bool dump_depgraph = false;
    SipsStrategy sips = SipsStrategy::linked;
};

struct StageTimes {
    double rewrite_ms = 0;
    double subsumption_ms = 0;
    double evaluation_ms = 0;
};

struct PipelineStats {
    std::size_t input_rules = 0;
    std::size_t output_rules = 0;
    RewriteStats rewrite;
    std::size_t full_free_removed = 0;
    SubsumptionStats subsumption;
    std::size_t answers = 0;

    // Deterministic counters only.
    std::string to_key_values() const;
};

// The program that gets evaluated.
struct Prepared {
    Program program;
    PipelineStats stats;
    StageTimes times;
};

Prepared prepare(const Program& program, const Atom& query, const PipelineConfig& config);

struct Solution {
    Prepared prepared;
    std::set<Tuple> answers;
};

Solution solve(const Program& program, const Atom& query, const PipelineConfig& config);

// Benchmark families: rules plus `edb(0..base*size).`
enum class Family { pi1, pi2, pi3 };

std::optional<Family> parse_family(std::string_view text);
std::string generate(Family family, std::int64_t size, std::int64_t base = 1000000);

}  // namespace magicdl
