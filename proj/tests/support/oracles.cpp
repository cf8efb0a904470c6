#include "support/oracles.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace magicdl::testing {

namespace {

using Sigma = std::map<VariableId, Term>;

Term substitute(Term t, const Sigma& sigma) {
    if (!t.is_variable()) return t;
    auto it = sigma.find(t.variable_id());
    return it == sigma.end() ? t : it->second;
}

Atom substitute(const Atom& atom, const Sigma& sigma) {
    Atom out{atom.predicate, {}};
    for (Term t : atom.terms) out.terms.push_back(substitute(t, sigma));
    return out;
}

BodyElement substitute(const BodyElement& element, const Sigma& sigma) {
    if (const auto* literal = std::get_if<Literal>(&element)) return Literal{substitute(literal->atom, sigma), literal->negated};
    auto aggregate = std::get<Aggregate>(element);
    for (auto& t : aggregate.head_terms) t = substitute(t, sigma);
    aggregate.inner = substitute(aggregate.inner, sigma);
    aggregate.guard = substitute(aggregate.guard, sigma);
    return aggregate;
}

std::set<VariableId> locals_of(const Rule& rule) {
    auto globals = global_variables(rule);
    std::set<VariableId> out;
    for (const auto* aggregate : rule.aggregates())
        for (auto v : variables_of(BodyElement{*aggregate}))
            if (!globals.contains(v)) out.insert(v);
    return out;
}

void collect_terms(const Rule& rule, std::set<Term>& out) {
    out.insert(rule.head.terms.begin(), rule.head.terms.end());
    for (const auto& element : rule.body) {
        const auto& atom = atom_of(element);
        out.insert(atom.terms.begin(), atom.terms.end());
        if (const auto* aggregate = std::get_if<Aggregate>(&element)) {
            out.insert(aggregate->head_terms.begin(), aggregate->head_terms.end());
            out.insert(aggregate->guard);
        }
    }
}

}  // namespace

bool brute_force_subsumes(const Rule& r, const Rule& r_prime) {
    std::vector<VariableId> vars;
    collect_variables(r.head, vars);
    for (const auto& element : r.body) collect_variables(element, vars);
    std::sort(vars.begin(), vars.end());
    vars.erase(std::unique(vars.begin(), vars.end()), vars.end());

    std::set<Term> term_set;
    collect_terms(r_prime, term_set);
    std::vector<Term> terms(term_set.begin(), term_set.end());
    if (!vars.empty() && terms.empty()) return false;

    const auto locals = locals_of(r);
    const auto target_locals = locals_of(r_prime);

    std::vector<std::size_t> digits(vars.size(), 0);
    while (true) {
        Sigma sigma;
        for (std::size_t i = 0; i < vars.size(); ++i) sigma[vars[i]] = terms[digits[i]];

        bool ok = substitute(r.head, sigma) == r_prime.head;
        for (std::size_t i = 0; ok && i < r.body.size(); ++i) {
            auto image = substitute(r.body[i], sigma);
            ok = std::find(r_prime.body.begin(), r_prime.body.end(), image) != r_prime.body.end();
        }
        if (ok) {
            std::set<VariableId> images;
            for (auto v : locals) {
                Term t = sigma.at(v);
                if (!t.is_variable() || !target_locals.contains(t.variable_id()) ||
                    !images.insert(t.variable_id()).second) {
                    ok = false;
                    break;
                }
            }
        }
        if (ok) return true;

        std::size_t i = 0;
        for (; i < digits.size(); ++i) {
            if (++digits[i] < terms.size()) break;
            digits[i] = 0;
        }
        if (i == digits.size()) return false;
    }
}

namespace {

std::optional<std::int64_t> sum_in(const std::set<Atom>& model, const Aggregate& aggregate,
                                   const SymbolTable& symbols) {
    std::set<std::vector<ConstantId>> tuples;
    for (const auto& atom : model) {
        if (atom.predicate != aggregate.inner.predicate) continue;
        std::map<VariableId, ConstantId> local;
        bool ok = true;
        for (std::size_t i = 0; i < atom.arity() && ok; ++i) {
            Term t = aggregate.inner.terms[i];
            auto c = atom.terms[i].constant_id();
            if (t.is_constant()) {
                ok = t.constant_id() == c;
            } else {
                auto [it, inserted] = local.emplace(t.variable_id(), c);
                ok = inserted || it->second == c;
            }
        }
        if (!ok) continue;
        std::vector<ConstantId> tuple;
        for (Term t : aggregate.head_terms) {
            if (t.is_constant()) {
                tuple.push_back(t.constant_id());
            } else {
                auto it = local.find(t.variable_id());
                if (it == local.end()) return std::nullopt;
                tuple.push_back(it->second);
            }
        }
        tuples.insert(std::move(tuple));
    }
    std::int64_t sum = 0;
    for (const auto& tuple : tuples) {
        if (!symbols.is_integer(tuple.front())) return std::nullopt;
        sum += symbols.integer_value(tuple.front());
    }
    return sum;
}

}  // namespace

std::vector<ConstantId> oracle_domain(const Program& program, const Interpretation& model) {
    auto& symbols = *program.symbols;
    auto constants = program_constants(program);
    std::set<ConstantId> domain(constants.begin(), constants.end());
    const auto atoms = model.atoms();
    for (const auto& atom : atoms)
        for (Term t : atom.terms) domain.insert(t.constant_id());

    for (int round = 0; round < 6; ++round) {
        const auto before = domain.size();
        const std::vector<ConstantId> current(domain.begin(), domain.end());
        for (const auto& rule : program.rules) {
            const auto globals = global_variables(rule);
            for (const auto* aggregate : rule.aggregates()) {
                auto assigned = aggregate->assignment_variable();
                if (!assigned) continue;
                std::vector<VariableId> inputs;
                for (auto v : variables_of(BodyElement{*aggregate}))
                    if (globals.contains(v) && v != *assigned) inputs.push_back(v);
                std::vector<std::size_t> digits(inputs.size(), 0);
                if (!inputs.empty() && current.empty()) continue;
                while (true) {
                    Sigma sigma;
                    for (std::size_t i = 0; i < inputs.size(); ++i)
                        sigma[inputs[i]] = Term::constant(current[digits[i]]);
                    auto instance = std::get<Aggregate>(substitute(BodyElement{*aggregate}, sigma));
                    if (auto sum = sum_in(atoms, instance, symbols)) domain.insert(symbols.intern_integer(*sum));
                    std::size_t i = 0;
                    for (; i < digits.size(); ++i) {
                        if (++digits[i] < current.size()) break;
                        digits[i] = 0;
                    }
                    if (i == digits.size()) break;
                }
            }
        }
        if (domain.size() == before) break;
    }
    return {domain.begin(), domain.end()};
}

std::optional<bool> check_stable_model(const Program& program, const Interpretation& model, std::size_t max_free_atoms,
                                       std::size_t max_ground_rules) {
    try {
        auto ground = naive_ground(program, oracle_domain(program, model), max_ground_rules);
        return is_stable_model(ground, model.atoms(), *program.symbols, max_free_atoms);
    } catch (const GroundingLimit&) {
        return std::nullopt;
    }
}

bool components_preserved(const Program& original, const Program& rewritten) {
    DependencyGraph before(original);
    auto old_partition = sccs(before);
    auto new_partition = sccs(DependencyGraph(rewritten));
    for (const auto& component : new_partition.components) {
        std::optional<std::size_t> seen;
        for (auto p : component) {
            if (!before.nodes().contains(p)) continue;
            auto c = old_partition.component_of.at(p);
            if (seen && *seen != c) return false;
            seen = c;
        }
    }
    return true;
}

}  // namespace magicdl::testing
