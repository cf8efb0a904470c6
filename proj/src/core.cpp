#include "magicdl/core.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_set>

namespace magicdl {

bool Atom::is_ground() const {
    return std::all_of(terms.begin(), terms.end(), [](Term t) { return t.is_constant(); });
}

std::string_view to_string(Comparator cmp) {
    switch (cmp) {
        case Comparator::less: return "<";
        case Comparator::less_equal: return "<=";
        case Comparator::equal: return "=";
        case Comparator::not_equal: return "!=";
        case Comparator::greater_equal: return ">=";
        case Comparator::greater: return ">";
    }
    return "?";
}

bool compare(std::int64_t lhs, Comparator cmp, std::int64_t rhs) {
    switch (cmp) {
        case Comparator::less: return lhs < rhs;
        case Comparator::less_equal: return lhs <= rhs;
        case Comparator::equal: return lhs == rhs;
        case Comparator::not_equal: return lhs != rhs;
        case Comparator::greater_equal: return lhs >= rhs;
        case Comparator::greater: return lhs > rhs;
    }
    return false;
}

std::optional<VariableId> Aggregate::assignment_variable() const {
    if (comparator == Comparator::equal && guard.is_variable()) return guard.variable_id();
    return std::nullopt;
}

const Atom& atom_of(const BodyElement& element) {
    if (const auto* literal = std::get_if<Literal>(&element)) return literal->atom;
    return std::get<Aggregate>(element).inner;
}

bool is_positive_literal(const BodyElement& element) {
    const auto* literal = std::get_if<Literal>(&element);
    return literal != nullptr && !literal->negated;
}

bool is_negative_literal(const BodyElement& element) {
    const auto* literal = std::get_if<Literal>(&element);
    return literal != nullptr && literal->negated;
}

bool is_aggregate(const BodyElement& element) { return std::holds_alternative<Aggregate>(element); }

std::vector<const Literal*> Rule::positive_body() const {
    std::vector<const Literal*> out;
    for (const auto& element : body)
        if (is_positive_literal(element)) out.push_back(&std::get<Literal>(element));
    return out;
}

std::vector<const Literal*> Rule::negative_body() const {
    std::vector<const Literal*> out;
    for (const auto& element : body)
        if (is_negative_literal(element)) out.push_back(&std::get<Literal>(element));
    return out;
}

std::vector<const Aggregate*> Rule::aggregates() const {
    std::vector<const Aggregate*> out;
    for (const auto& element : body)
        if (const auto* aggregate = std::get_if<Aggregate>(&element)) out.push_back(aggregate);
    return out;
}

// ---------------------------------------------------------------------------
// SymbolTable

namespace {

std::string predicate_key(std::string_view name, std::size_t arity) {
    std::string key(name);
    key += '/';
    key += std::to_string(arity);
    return key;
}

}  // namespace

PredicateId SymbolTable::intern_predicate(std::string_view name, std::size_t arity) {
    auto key = predicate_key(name, arity);
    if (auto it = predicate_index_.find(key); it != predicate_index_.end()) return it->second;
    PredicateId id{static_cast<std::uint32_t>(predicates_.size())};
    predicates_.push_back(PredicateInfo{std::string(name), arity, std::nullopt});
    predicate_index_.emplace(std::move(key), id);
    return id;
}

PredicateId SymbolTable::intern_magic(PredicateId base, std::string_view adornment) {
    const auto base_name = predicate(base).name;  // copy: predicates_ may grow
    std::string name = "m#" + base_name + "#" + std::string(adornment);
    std::size_t arity = static_cast<std::size_t>(std::count(adornment.begin(), adornment.end(), 'b'));
    auto id = intern_predicate(name, arity);
    auto& info = predicates_[index_of(id)];
    if (!info.magic) info.magic = MagicInfo{base, std::string(adornment)};
    return id;
}

ConstantId SymbolTable::intern_symbol(std::string_view name) {
    std::string key(name);
    if (auto it = symbol_index_.find(key); it != symbol_index_.end()) return it->second;
    ConstantId id{static_cast<std::uint32_t>(constants_.size())};
    constants_.push_back(ConstantEntry{false, 0, key});
    symbol_index_.emplace(std::move(key), id);
    return id;
}

ConstantId SymbolTable::intern_integer(std::int64_t value) {
    if (auto it = integer_index_.find(value); it != integer_index_.end()) return it->second;
    ConstantId id{static_cast<std::uint32_t>(constants_.size())};
    constants_.push_back(ConstantEntry{true, value, {}});
    integer_index_.emplace(value, id);
    return id;
}

std::optional<PredicateId> SymbolTable::find_predicate(std::string_view name, std::size_t arity) const {
    if (auto it = predicate_index_.find(predicate_key(name, arity)); it != predicate_index_.end()) return it->second;
    return std::nullopt;
}

std::optional<ConstantId> SymbolTable::find_symbol(std::string_view name) const {
    if (auto it = symbol_index_.find(std::string(name)); it != symbol_index_.end()) return it->second;
    return std::nullopt;
}

std::string SymbolTable::constant_text(ConstantId id) const {
    const auto& entry = constants_.at(index_of(id));
    return entry.integer ? std::to_string(entry.value) : entry.name;
}

std::set<PredicateId> Program::predicates() const {
    std::set<PredicateId> out;
    for (const auto& rule : rules) {
        out.insert(rule.head.predicate);
        for (const auto& element : rule.body) out.insert(atom_of(element).predicate);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Variables

void collect_variables(const Atom& atom, std::vector<VariableId>& out) {
    for (Term t : atom.terms)
        if (t.is_variable()) out.push_back(t.variable_id());
}

void collect_variables(const BodyElement& element, std::vector<VariableId>& out) {
    if (const auto* literal = std::get_if<Literal>(&element)) {
        collect_variables(literal->atom, out);
        return;
    }
    const auto& aggregate = std::get<Aggregate>(element);
    for (Term t : aggregate.head_terms)
        if (t.is_variable()) out.push_back(t.variable_id());
    collect_variables(aggregate.inner, out);
    if (aggregate.guard.is_variable()) out.push_back(aggregate.guard.variable_id());
}

std::set<VariableId> variables_of(const BodyElement& element) {
    std::vector<VariableId> vars;
    collect_variables(element, vars);
    return {vars.begin(), vars.end()};
}

std::set<VariableId> variables_of(const Atom& atom) {
    std::vector<VariableId> vars;
    collect_variables(atom, vars);
    return {vars.begin(), vars.end()};
}

std::set<VariableId> global_variables(const Rule& rule) {
    std::vector<VariableId> vars;
    collect_variables(rule.head, vars);
    for (const auto& element : rule.body) {
        if (const auto* literal = std::get_if<Literal>(&element)) {
            collect_variables(literal->atom, vars);
        } else {
            const auto& aggregate = std::get<Aggregate>(element);
            if (aggregate.guard.is_variable()) vars.push_back(aggregate.guard.variable_id());
        }
    }
    return {vars.begin(), vars.end()};
}

std::set<VariableId> assignment_variables(const Rule& rule) {
    std::set<VariableId> out;
    for (const auto* aggregate : rule.aggregates())
        if (auto var = aggregate->assignment_variable()) out.insert(*var);
    return out;
}

SafetyVerdict is_safe(const Rule& rule) {
    SafetyVerdict verdict;
    auto name_of = [&](VariableId v) {
        return index_of(v) < rule.variable_names.size() ? rule.variable_names[index_of(v)] : std::string("_");
    };

    const auto globals = global_variables(rule);
    const auto assigned = assignment_variables(rule);
    std::set<VariableId> positive;
    for (const auto* literal : rule.positive_body()) {
        auto vars = variables_of(literal->atom);
        positive.insert(vars.begin(), vars.end());
    }
    for (auto v : globals)
        if (!positive.contains(v) && !assigned.contains(v))
            verdict.unsafe.push_back({v, name_of(v), VariableScope::global});

    std::set<VariableId> reported;
    for (const auto* aggregate : rule.aggregates()) {
        auto inner = variables_of(aggregate->inner);
        for (auto v : variables_of(BodyElement{*aggregate})) {
            if (globals.contains(v) || inner.contains(v) || reported.contains(v)) continue;
            reported.insert(v);
            verdict.unsafe.push_back({v, name_of(v), VariableScope::local});
        }
    }
    return verdict;
}

PredicateClasses classify_predicates(const Program& program) {
    PredicateClasses classes;
    std::set<PredicateId> defined_by_rule;
    for (const auto& rule : program.rules)
        if (!rule.is_fact()) defined_by_rule.insert(rule.head.predicate);
    for (auto p : program.predicates()) {
        if (defined_by_rule.contains(p))
            classes.intentional.insert(p);
        else
            classes.extensional.insert(p);
    }
    return classes;
}

// ---------------------------------------------------------------------------
// Canonical forms

namespace {

struct Renamer {
    std::unordered_map<std::uint32_t, std::uint32_t> mapping;
    std::vector<std::string> names;
    const std::vector<std::string>* source_names = nullptr;

    Term operator()(Term t) {
        if (!t.is_variable()) return t;
        auto old_id = index_of(t.variable_id());
        auto [it, inserted] = mapping.try_emplace(old_id, static_cast<std::uint32_t>(names.size()));
        if (inserted) {
            names.push_back(old_id < source_names->size() ? (*source_names)[old_id]
                                                          : "V" + std::to_string(old_id));
        }
        return Term::variable(VariableId{it->second});
    }

    void rename(Atom& atom) {
        for (auto& t : atom.terms) t = (*this)(t);
    }
};

}  // namespace

Rule canonicalize(const Rule& rule) {
    Rule out = rule;
    Renamer renamer;
    renamer.source_names = &rule.variable_names;
    renamer.rename(out.head);
    for (auto& element : out.body) {
        if (auto* literal = std::get_if<Literal>(&element)) {
            renamer.rename(literal->atom);
        } else {
            auto& aggregate = std::get<Aggregate>(element);
            for (auto& t : aggregate.head_terms) t = renamer(t);
            renamer.rename(aggregate.inner);
            aggregate.guard = renamer(aggregate.guard);
        }
    }
    out.variable_names = std::move(renamer.names);
    return out;
}

namespace {

void encode_term(Term t, std::vector<std::uint32_t>& key) {
    key.push_back(t.is_variable() ? 1u : 0u);
    key.push_back(t.is_variable() ? index_of(t.variable_id()) : index_of(t.constant_id()));
}

void encode_atom(const Atom& atom, std::vector<std::uint32_t>& key) {
    key.push_back(index_of(atom.predicate));
    key.push_back(static_cast<std::uint32_t>(atom.terms.size()));
    for (Term t : atom.terms) encode_term(t, key);
}

}  // namespace

std::vector<std::uint32_t> structural_key(const Rule& rule) {
    std::vector<std::uint32_t> key;
    encode_atom(rule.head, key);
    for (const auto& element : rule.body) {
        if (const auto* literal = std::get_if<Literal>(&element)) {
            key.push_back(literal->negated ? 2u : 1u);
            encode_atom(literal->atom, key);
        } else {
            const auto& aggregate = std::get<Aggregate>(element);
            key.push_back(3u);
            key.push_back(static_cast<std::uint32_t>(aggregate.head_terms.size()));
            for (Term t : aggregate.head_terms) encode_term(t, key);
            encode_atom(aggregate.inner, key);
            key.push_back(static_cast<std::uint32_t>(aggregate.comparator));
            encode_term(aggregate.guard, key);
        }
    }
    return key;
}

std::size_t StructuralKeyHash::operator()(const std::vector<std::uint32_t>& key) const {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (auto v : key) {
        h ^= v;
        h *= 0x100000001b3ull;
    }
    return static_cast<std::size_t>(h);
}

std::size_t deduplicate(std::vector<Rule>& rules) {
    std::unordered_set<std::vector<std::uint32_t>, StructuralKeyHash> seen;
    std::vector<Rule> kept;
    kept.reserve(rules.size());
    for (auto& rule : rules) {
        auto canonical = canonicalize(rule);
        if (seen.insert(structural_key(canonical)).second) kept.push_back(std::move(canonical));
    }
    std::size_t removed = rules.size() - kept.size();
    rules = std::move(kept);
    return removed;
}

}  // namespace magicdl
