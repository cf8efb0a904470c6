#include "magicdl/subsumption.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <unordered_set>

namespace magicdl {

namespace {

std::uint64_t mask(unsigned width) { return width >= 64 ? ~0ull : (1ull << width) - 1; }

void or_constants(const std::vector<Term>& terms, std::uint64_t& field) {
    for (Term t : terms)
        if (t.is_constant()) field |= index_of(t.constant_id());
}

}  // namespace

std::uint64_t RuleHash::field(std::size_t index) const {
    unsigned shift = 0;
    for (std::size_t i = index + 1; i < layout.widths.size(); ++i) shift += layout.widths[i];
    return (bits >> shift) & mask(layout.widths[index]);
}

std::string RuleHash::to_bit_string() const {
    std::string out;
    for (std::size_t i = 0; i < layout.widths.size(); ++i) {
        if (i > 0) out += ' ';
        auto value = field(i);
        for (unsigned b = layout.widths[i]; b-- > 0;) out += ((value >> b) & 1) ? '1' : '0';
    }
    return out;
}

RuleHash rule_hash(const Rule& rule, const HashLayout& layout) {
    std::array<std::uint64_t, 6> fields{};
    fields[0] |= index_of(rule.head.predicate);
    or_constants(rule.head.terms, fields[1]);
    for (const auto& element : rule.body) {
        if (const auto* literal = std::get_if<Literal>(&element)) {
            auto base = literal->negated ? 4 : 2;
            fields[base] |= index_of(literal->atom.predicate);
            or_constants(literal->atom.terms, fields[base + 1]);
        } else {
            const auto& aggregate = std::get<Aggregate>(element);
            fields[2] |= index_of(aggregate.inner.predicate);
            or_constants(aggregate.head_terms, fields[3]);
            or_constants(aggregate.inner.terms, fields[3]);
            or_constants({aggregate.guard}, fields[3]);
        }
    }
    RuleHash hash;
    hash.layout = layout;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        auto width = layout.widths[i];
        hash.bits = (width >= 64 ? 0 : hash.bits << width) | (fields[i] & mask(width));
    }
    return hash;
}

// ---------------------------------------------------------------------------
// Substitution

Substitution Substitution::failure() {
    Substitution s;
    s.bind(VariableId{0}, Term::constant(ConstantId{0}));
    s.bind(VariableId{0}, Term::constant(ConstantId{1}));
    return s;
}

Substitution Substitution::merge(const Substitution& other) const {
    Substitution out = *this;
    out.bindings_.insert(out.bindings_.end(), other.bindings_.begin(), other.bindings_.end());
    return out;
}

bool Substitution::is_function() const {
    std::map<VariableId, Term> seen;
    for (const auto& [variable, term] : bindings_) {
        auto [it, inserted] = seen.emplace(variable, term);
        if (!inserted && it->second != term) return false;
    }
    return true;
}

std::optional<Term> Substitution::lookup(VariableId variable) const {
    for (const auto& [v, t] : bindings_)
        if (v == variable) return t;
    return std::nullopt;
}

namespace {

bool unify_terms(const std::vector<Term>& terms, const std::vector<Term>& others, Substitution& out) {
    if (terms.size() != others.size()) return false;
    for (std::size_t i = 0; i < terms.size(); ++i) {
        if (terms[i].is_constant()) {
            if (terms[i] != others[i]) return false;
        } else {
            out.bind(terms[i].variable_id(), others[i]);
        }
    }
    return true;
}

}  // namespace

Substitution one_way_unify(const Atom& atom, const Atom& other) {
    Substitution out;
    if (atom.predicate != other.predicate || !unify_terms(atom.terms, other.terms, out)) return Substitution::failure();
    return out;
}

Substitution one_way_unify(const BodyElement& element, const BodyElement& other) {
    if (element.index() != other.index()) return Substitution::failure();
    if (const auto* literal = std::get_if<Literal>(&element)) {
        const auto& other_literal = std::get<Literal>(other);
        if (literal->negated != other_literal.negated) return Substitution::failure();
        return one_way_unify(literal->atom, other_literal.atom);
    }
    const auto& aggregate = std::get<Aggregate>(element);
    const auto& other_aggregate = std::get<Aggregate>(other);
    if (aggregate.inner.predicate != other_aggregate.inner.predicate ||
        aggregate.comparator != other_aggregate.comparator)
        return Substitution::failure();
    // head terms, ':', inner terms, guard as one list; ':' lines up exactly
    // when the head term lists have equal length.
    Substitution out;
    if (!unify_terms(aggregate.head_terms, other_aggregate.head_terms, out) ||
        !unify_terms(aggregate.inner.terms, other_aggregate.inner.terms, out) ||
        !unify_terms({aggregate.guard}, {other_aggregate.guard}, out))
        return Substitution::failure();
    return out;
}

namespace {

std::set<VariableId> local_variables(const Rule& rule) {
    const auto globals = global_variables(rule);
    std::set<VariableId> out;
    for (const auto* aggregate : rule.aggregates())
        for (auto v : variables_of(BodyElement{*aggregate}))
            if (!globals.contains(v)) out.insert(v);
    return out;
}

bool respects_locality(const Substitution& sigma, const std::set<VariableId>& locals,
                       const std::set<VariableId>& target_locals) {
    std::set<VariableId> images;
    for (auto v : locals) {
        auto t = sigma.lookup(v);
        if (!t || !t->is_variable() || !target_locals.contains(t->variable_id())) return false;
        if (!images.insert(t->variable_id()).second) return false;
    }
    return true;
}

}  // namespace

bool subsumes(const Rule& r, const Rule& r_prime) {
    struct State {
        Substitution sigma;
        std::size_t next;
    };
    const auto locals = local_variables(r);
    const auto target_locals = local_variables(r_prime);

    std::vector<State> stack{{one_way_unify(r.head, r_prime.head), 0}};
    while (!stack.empty()) {
        auto state = std::move(stack.back());
        stack.pop_back();
        if (!state.sigma.is_function()) continue;
        if (state.next == r.body.size()) {
            if (respects_locality(state.sigma, locals, target_locals)) return true;
            continue;
        }
        const auto& element = r.body[state.next];
        for (auto it = r_prime.body.rbegin(); it != r_prime.body.rend(); ++it)
            stack.push_back({state.sigma.merge(one_way_unify(element, *it)), state.next + 1});
    }
    return false;
}

std::string SubsumptionStats::to_key_values() const {
    std::ostringstream out;
    out << "candidates=" << candidates << "\n"
        << "hash_pruned=" << hash_pruned << "\n"
        << "checks=" << checks << "\n"
        << "removed=" << removed << "\n";
    return out.str();
}

namespace {

struct AtomHash {
    std::size_t operator()(const Atom* p) const {
        const auto& atom = *p;
        std::uint64_t h = 0xcbf29ce484222325ull ^ index_of(atom.predicate);
        for (Term t : atom.terms) {
            h ^= (static_cast<std::uint64_t>(t.is_variable()) << 32) | index_of(t.constant_id());
            h *= 0x100000001b3ull;
        }
        return static_cast<std::size_t>(h);
    }
};

struct AtomEqual {
    bool operator()(const Atom* a, const Atom* b) const { return *a == *b; }
};

}  // namespace

SubsumptionResult eliminate_subsumed(Program program, const HashLayout& layout) {
    SubsumptionResult result{program.empty_like(), {}};
    auto& stats = result.stats;
    const auto& rules = program.rules;
    std::vector<bool> removed(rules.size(), false);

    // Facts: only an identical fact subsumes a fact, and a fact subsumes
    // exactly the rules whose head is that fact.
    std::unordered_set<const Atom*, AtomHash, AtomEqual> facts;
    facts.reserve(rules.size());
    std::vector<std::size_t> others;
    for (std::size_t i = 0; i < rules.size(); ++i) {
        if (!rules[i].is_fact()) {
            others.push_back(i);
            continue;
        }
        if (!facts.insert(&rules[i].head).second) {
            ++stats.candidates;
            ++stats.checks;
            ++stats.removed;
            removed[i] = true;
        }
    }
    for (auto i : others) {
        if (!rules[i].head.is_ground() || !facts.contains(&rules[i].head)) continue;
        ++stats.candidates;
        ++stats.checks;
        ++stats.removed;
        removed[i] = true;
    }

    std::vector<RuleHash> hashes(rules.size());
    for (auto i : others) hashes[i] = rule_hash(rules[i], layout);
    for (auto i : others) {
        if (removed[i]) continue;
        for (auto j : others) {
            if (i == j || removed[j]) continue;
            ++stats.candidates;
            if (!hashes[i].admits(hashes[j])) {
                ++stats.hash_pruned;
                continue;
            }
            ++stats.checks;
            if (subsumes(rules[i], rules[j])) {
                removed[j] = true;
                ++stats.removed;
            }
        }
    }

    for (std::size_t i = 0; i < rules.size(); ++i)
        if (!removed[i]) result.program.rules.push_back(std::move(program.rules[i]));
    return result;
}

}  // namespace magicdl
