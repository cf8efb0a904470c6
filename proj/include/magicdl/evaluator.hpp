#pragma once

// Bottom-up evaluation of stratified programs, plus a brute-force stable
// model checker over explicit groundings.

#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "magicdl/core.hpp"

namespace magicdl {

class EvalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Set of tuples of one predicate. Rows keep insertion order, so a row range
// [lo, hi) is the set of tuples added between two points in time.
class Relation {
public:
    explicit Relation(std::size_t arity = 0) : arity_(arity) {}

    std::size_t arity() const { return arity_; }
    std::size_t size() const { return count_; }
    bool empty() const { return count_ == 0; }

    // False if the row was already present.
    bool insert(std::span<const ConstantId> row);
    bool contains(std::span<const ConstantId> row) const;
    std::span<const ConstantId> row(std::size_t i) const { return {data_.data() + i * arity_, arity_}; }

    // Rows in [lo, hi) agreeing with `key` on every column set in `mask`.
    template <class F>
    void scan(std::uint64_t mask, std::span<const ConstantId> key, std::size_t lo, std::size_t hi, F&& visit) const;

private:
    struct Index {
        std::unordered_map<std::uint64_t, std::uint32_t> head;
        std::vector<std::uint32_t> next;
    };

    std::uint64_t hash_row(std::span<const ConstantId> row) const;
    std::uint64_t hash_masked(std::uint64_t mask, std::span<const ConstantId> row) const;
    bool matches(std::uint64_t mask, std::span<const ConstantId> key, std::size_t row) const;
    std::size_t find_slot(std::span<const ConstantId> row, std::uint64_t hash) const;
    void grow();
    Index& index_for(std::uint64_t mask) const;

    static constexpr std::uint32_t none = 0xffffffffu;

    std::size_t arity_ = 0;
    std::size_t count_ = 0;
    std::vector<ConstantId> data_;
    std::vector<std::uint32_t> slots_;  // row + 1, 0 when empty
    mutable std::map<std::uint64_t, Index> indexes_;
};

template <class F>
void Relation::scan(std::uint64_t mask, std::span<const ConstantId> key, std::size_t lo, std::size_t hi,
                    F&& visit) const {
    hi = std::min(hi, count_);
    if (lo >= hi) return;
    if (mask == 0 || arity_ == 0) {
        for (std::size_t i = lo; i < hi; ++i) visit(i);
        return;
    }
    const auto& index = index_for(mask);
    auto it = index.head.find(hash_masked(mask, key));
    if (it == index.head.end()) return;
    // Chains run newest first.
    for (auto row = it->second; row != none; row = index.next[row]) {
        if (row >= hi) continue;
        if (row < lo) break;
        if (matches(mask, key, row)) visit(row);
    }
}

class Interpretation {
public:
    const Relation* find(PredicateId predicate) const;
    Relation& relation(PredicateId predicate, std::size_t arity);

    bool contains(const Atom& ground) const;
    std::size_t size() const;

    // Ground atoms, ordered by predicate id then tuple.
    std::set<Atom> atoms() const;
    // "p(c1,...,ck)" lines, sorted.
    std::vector<std::string> render(const SymbolTable& symbols) const;

    const std::map<PredicateId, Relation>& relations() const { return relations_; }

private:
    std::map<PredicateId, Relation> relations_;
};

struct EvalOptions {
    // Re-derive everything in every round instead of joining against deltas.
    bool semi_naive = true;
};

// The stable model of a safe stratified program. Throws UnstratifiableError or
// EvalError.
Interpretation stable_model(const Program& program, const EvalOptions& options = {});

using Tuple = std::vector<ConstantId>;

// Instances of the query's terms in the model, respecting its constants and
// repeated variables.
std::set<Tuple> answer(const Atom& query, const Interpretation& model);
std::set<Tuple> answer(const Atom& query, const Program& program, const EvalOptions& options = {});

// One "p(c1,...,ck)" line per tuple, sorted.
std::vector<std::string> format_answers(const Atom& query, const std::set<Tuple>& tuples, const SymbolTable& symbols);

// ---------------------------------------------------------------------------
// Oracle support

struct GroundRule {
    Atom head;
    std::vector<Literal> literals;
    // Guards are ground; local variables stay inside.
    std::vector<Aggregate> aggregates;

    friend bool operator==(const GroundRule&, const GroundRule&) = default;
    friend auto operator<=>(const GroundRule&, const GroundRule&) = default;
};

class GroundingLimit : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Every instantiation of every rule's global variables over `domain`.
std::vector<GroundRule> naive_ground(const Program& program, const std::vector<ConstantId>& domain,
                                     std::size_t limit = 200000);
// Same, over the constants occurring in the program.
std::vector<GroundRule> naive_ground(const Program& program, std::size_t limit = 200000);

std::vector<ConstantId> program_constants(const Program& program);

// Candidate satisfies every ground rule and no proper subset satisfies the
// reduct. Enumerates subsets of the atoms not fixed by facts.
bool is_stable_model(const std::vector<GroundRule>& ground, const std::set<Atom>& candidate,
                     const SymbolTable& symbols, std::size_t max_free_atoms = 16);

// I |= aggregate, for a ground-guard aggregate.
bool satisfies(const std::set<Atom>& interpretation, const Aggregate& aggregate, const SymbolTable& symbols);

}  // namespace magicdl
