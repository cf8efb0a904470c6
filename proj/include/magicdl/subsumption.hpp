#pragma once

// Subsumed-rule elimination with a bit-string prefilter.

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "magicdl/core.hpp"

namespace magicdl {

// Field widths, most significant first: head predicates, head constants,
// B+ and aggregate predicates, B+ and aggregate constants, B- predicates,
// B- constants.
struct HashLayout {
    std::array<unsigned, 6> widths{8, 8, 16, 16, 8, 8};
};

struct RuleHash {
    std::uint64_t bits = 0;
    HashLayout layout;

    std::uint64_t field(std::size_t index) const;
    // Fields in binary separated by spaces, e.g. "01 00 10 00 00 00".
    std::string to_bit_string() const;

    // hash(r) & hash(r') == hash(r): r may subsume r'.
    bool admits(const RuleHash& other) const { return (bits & other.bits) == bits; }
};

RuleHash rule_hash(const Rule& rule, const HashLayout& layout = {});

// Bindings from variables of the subsuming rule to terms of the other rule.
// May bind a variable twice, in which case it is not a function.
class Substitution {
public:
    Substitution() = default;

    static Substitution failure();

    void bind(VariableId variable, Term term) { bindings_.emplace_back(variable, term); }
    Substitution merge(const Substitution& other) const;
    bool is_function() const;

    const std::vector<std::pair<VariableId, Term>>& bindings() const { return bindings_; }
    std::optional<Term> lookup(VariableId variable) const;

private:
    std::vector<std::pair<VariableId, Term>> bindings_;
};

Substitution one_way_unify(const Atom& atom, const Atom& other);
Substitution one_way_unify(const BodyElement& element, const BodyElement& other);

// Some σ maps H(r) onto H(r') and B(r) into B(r'). Local variables of r's
// aggregates must map one-to-one onto local variables of r'.
bool subsumes(const Rule& r, const Rule& r_prime);

struct SubsumptionStats {
    std::size_t candidates = 0;
    std::size_t hash_pruned = 0;
    std::size_t checks = 0;
    std::size_t removed = 0;

    std::string to_key_values() const;
};

struct SubsumptionResult {
    Program program;
    SubsumptionStats stats;
};

SubsumptionResult eliminate_subsumed(Program program, const HashLayout& layout = {});

}  // namespace magicdl
