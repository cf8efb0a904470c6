#pragma once

// Interned syntax for Datalog with stratified negation and #sum aggregates.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

namespace magicdl {

enum class PredicateId : std::uint32_t {};
enum class ConstantId : std::uint32_t {};
enum class VariableId : std::uint32_t {};

constexpr std::uint32_t index_of(PredicateId id) { return static_cast<std::uint32_t>(id); }
constexpr std::uint32_t index_of(ConstantId id) { return static_cast<std::uint32_t>(id); }
constexpr std::uint32_t index_of(VariableId id) { return static_cast<std::uint32_t>(id); }

class Term {
public:
    constexpr Term() = default;

    static constexpr Term constant(ConstantId id) { return Term(Kind::constant, index_of(id)); }
    static constexpr Term variable(VariableId id) { return Term(Kind::variable, index_of(id)); }

    constexpr bool is_constant() const { return kind_ == Kind::constant; }
    constexpr bool is_variable() const { return kind_ == Kind::variable; }
    constexpr ConstantId constant_id() const { return ConstantId{id_}; }
    constexpr VariableId variable_id() const { return VariableId{id_}; }

    friend constexpr bool operator==(Term, Term) = default;
    friend constexpr auto operator<=>(Term, Term) = default;

private:
    enum class Kind : std::uint8_t { constant, variable };
    constexpr Term(Kind kind, std::uint32_t id) : kind_(kind), id_(id) {}

    Kind kind_ = Kind::constant;
    std::uint32_t id_ = 0;
};

struct Atom {
    PredicateId predicate{};
    std::vector<Term> terms;

    std::size_t arity() const { return terms.size(); }
    bool is_ground() const;

    friend bool operator==(const Atom&, const Atom&) = default;
    friend auto operator<=>(const Atom&, const Atom&) = default;
};

struct Literal {
    Atom atom;
    bool negated = false;

    bool positive() const { return !negated; }

    friend bool operator==(const Literal&, const Literal&) = default;
    friend auto operator<=>(const Literal&, const Literal&) = default;
};

enum class Comparator : std::uint8_t { less, less_equal, equal, not_equal, greater_equal, greater };

std::string_view to_string(Comparator cmp);
bool compare(std::int64_t lhs, Comparator cmp, std::int64_t rhs);

// #sum{head_terms : inner} <comparator> guard. The summed value is head_terms[0];
// the remaining head terms only make tuples distinct.
struct Aggregate {
    std::vector<Term> head_terms;
    Atom inner;
    Comparator comparator = Comparator::equal;
    Term guard;

    // X in `#sum{...} = X`.
    std::optional<VariableId> assignment_variable() const;

    friend bool operator==(const Aggregate&, const Aggregate&) = default;
    friend auto operator<=>(const Aggregate&, const Aggregate&) = default;
};

using BodyElement = std::variant<Literal, Aggregate>;

// The atom an element talks about: the literal's atom or the aggregate's inner atom.
const Atom& atom_of(const BodyElement& element);
bool is_positive_literal(const BodyElement& element);
bool is_negative_literal(const BodyElement& element);
bool is_aggregate(const BodyElement& element);

struct Rule {
    Atom head;
    // Body in textual order; the B+/B-/B^A partition is derived from it.
    std::vector<BodyElement> body;
    // Original spelling of each variable, indexed by VariableId.
    std::vector<std::string> variable_names;

    bool is_fact() const { return body.empty() && head.is_ground(); }

    std::vector<const Literal*> positive_body() const;
    std::vector<const Literal*> negative_body() const;
    std::vector<const Aggregate*> aggregates() const;

    friend bool operator==(const Rule&, const Rule&) = default;
};

struct MagicInfo {
    PredicateId base{};
    std::string adornment;
};

struct PredicateInfo {
    std::string name;
    std::size_t arity = 0;
    std::optional<MagicInfo> magic;
};

class SymbolTable {
public:
    PredicateId intern_predicate(std::string_view name, std::size_t arity);
    // m#<base>#<adornment>; arity is the number of bound positions.
    PredicateId intern_magic(PredicateId base, std::string_view adornment);
    ConstantId intern_symbol(std::string_view name);
    ConstantId intern_integer(std::int64_t value);

    std::optional<PredicateId> find_predicate(std::string_view name, std::size_t arity) const;
    std::optional<ConstantId> find_symbol(std::string_view name) const;

    const PredicateInfo& predicate(PredicateId id) const { return predicates_.at(index_of(id)); }
    const std::string& predicate_name(PredicateId id) const { return predicate(id).name; }
    bool is_magic(PredicateId id) const { return predicate(id).magic.has_value(); }

    bool is_integer(ConstantId id) const { return constants_.at(index_of(id)).integer; }
    std::int64_t integer_value(ConstantId id) const { return constants_.at(index_of(id)).value; }
    std::string constant_text(ConstantId id) const;

    std::size_t predicate_count() const { return predicates_.size(); }
    std::size_t constant_count() const { return constants_.size(); }

private:
    struct ConstantEntry {
        bool integer = false;
        std::int64_t value = 0;
        std::string name;
    };

    std::vector<PredicateInfo> predicates_;
    std::unordered_map<std::string, PredicateId> predicate_index_;
    std::vector<ConstantEntry> constants_;
    std::unordered_map<std::string, ConstantId> symbol_index_;
    std::unordered_map<std::int64_t, ConstantId> integer_index_;
};

struct Program {
    std::vector<Rule> rules;
    std::shared_ptr<SymbolTable> symbols = std::make_shared<SymbolTable>();

    // A program sharing this program's symbol table but no rules.
    Program empty_like() const { return Program{{}, symbols}; }

    std::set<PredicateId> predicates() const;
};

// ---------------------------------------------------------------------------
// Safety

enum class VariableScope { global, local };

struct UnsafeVariable {
    VariableId variable{};
    std::string name;
    VariableScope scope = VariableScope::global;

    friend bool operator==(const UnsafeVariable&, const UnsafeVariable&) = default;
};

struct SafetyVerdict {
    std::vector<UnsafeVariable> unsafe;

    bool safe() const { return unsafe.empty(); }
};

// Global variables occur in the head, in a literal, or as an aggregate guard.
std::set<VariableId> global_variables(const Rule& rule);
// Assignment variables: X in some `#sum{...} = X` of the rule.
std::set<VariableId> assignment_variables(const Rule& rule);

SafetyVerdict is_safe(const Rule& rule);

struct PredicateClasses {
    std::set<PredicateId> extensional;
    std::set<PredicateId> intentional;
};

PredicateClasses classify_predicates(const Program& program);

// ---------------------------------------------------------------------------
// Variable helpers

void collect_variables(const Atom& atom, std::vector<VariableId>& out);
void collect_variables(const BodyElement& element, std::vector<VariableId>& out);
std::set<VariableId> variables_of(const BodyElement& element);
std::set<VariableId> variables_of(const Atom& atom);

// Renumbers variables by first occurrence (head, then body in textual order)
// and drops unused variable names.
Rule canonicalize(const Rule& rule);

// Structural key of a canonicalized rule; equal keys mean equal rules up to
// variable renaming.
std::vector<std::uint32_t> structural_key(const Rule& rule);

struct StructuralKeyHash {
    std::size_t operator()(const std::vector<std::uint32_t>& key) const;
};

// Removes structurally duplicated rules (after canonical renaming), keeping the
// first occurrence.
std::size_t deduplicate(std::vector<Rule>& rules);

}  // namespace magicdl
