#pragma once

// Magic sets rewriting: adornments, SIPS, MS, MS-RS and the full-free pass.

#include <cstddef>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "magicdl/core.hpp"

namespace magicdl {

// One character per argument, 'b' bound or 'f' free.
using Adornment = std::string;

struct AdornedPredicate {
    PredicateId predicate{};
    Adornment adornment;

    friend bool operator==(const AdornedPredicate&, const AdornedPredicate&) = default;
    friend auto operator<=>(const AdornedPredicate&, const AdornedPredicate&) = default;
};

class UnknownQueryPredicate : public std::runtime_error {
public:
    explicit UnknownQueryPredicate(const std::string& name)
        : std::runtime_error("query predicate " + name + " does not occur in the program") {}
};

Adornment query_adornment(const Atom& query);

// m#p#s(bound terms). Interns the magic predicate in `symbols`.
Atom magic_atom(const Atom& atom, const Adornment& adornment, SymbolTable& symbols);

// Elements are indexed 0 for the head and i + 1 for body[i].
struct Sips {
    // before[i][j]: element i precedes element j.
    std::vector<std::vector<bool>> before;
    std::vector<std::set<VariableId>> bnd;

    std::size_t size() const { return bnd.size(); }
    bool precedes(std::size_t i, std::size_t j) const { return before[i][j]; }
};

enum class SipsStrategy {
    // A binder precedes a later element when a chain of shared bound
    // variables connects them.
    linked,
    // Every earlier binder precedes.
    textual,
};

// Binders are positive literals and assignment aggregates whose other global
// variables are bound by the head or by earlier binders.
Sips default_sips(const Rule& rule, const Adornment& adornment, SipsStrategy strategy = SipsStrategy::linked);

// Conditions of a well-formed SIPS that `sips` violates; empty when valid.
std::vector<std::string> sips_violations(const Rule& rule, const Adornment& adornment, const Sips& sips);

struct RewriteStats {
    std::size_t adorned_predicates = 0;
    std::size_t modified_rules = 0;
    std::size_t magic_rules = 0;
    std::size_t discarded_sips_arcs = 0;

    std::string to_key_values() const;
};

enum class MonitorMode {
    // All (m#p, m#q) arcs of rules reachable from the query are in the
    // monitor before the first binding arc is tested.
    upfront,
    // (m#p, m#q) arcs are added while rules are processed. Kept to exhibit
    // programs where this merges components on its own.
    on_demand,
};

struct RewriteOptions {
    SipsStrategy sips = SipsStrategy::linked;
    MonitorMode monitor = MonitorMode::upfront;
    // Cross-check every component test against a full recomputation.
    bool validate_monitor = false;
};

struct RewriteResult {
    Program program;
    RewriteStats stats;
    // Set when the monitor graph no longer projects onto the original
    // components (only possible with MonitorMode::on_demand).
    bool monitor_broken = false;
};

RewriteResult ms(const Atom& query, const Program& program, const RewriteOptions& options = {});
RewriteResult ms_rs(const Atom& query, const Program& program, const RewriteOptions& options = {});

// Rules over m#p#s are folded into m#p#f...f whenever the full-free version of
// p occurs.
Program full_free(Program program);

}  // namespace magicdl
