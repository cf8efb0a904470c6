#include "magicdl/evaluator.hpp"

#include <algorithm>
#include <functional>
#include <optional>

#include "magicdl/depgraph.hpp"
#include "magicdl/parser.hpp"

namespace magicdl {

// ---------------------------------------------------------------------------
// Relation

namespace {

inline std::uint64_t mix(std::uint64_t h, std::uint64_t v) {
    h ^= v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    return h * 0xff51afd7ed558ccdull;
}

}  // namespace

std::uint64_t Relation::hash_row(std::span<const ConstantId> row) const {
    std::uint64_t h = 0x84222325cbf29ce4ull;
    for (auto c : row) h = mix(h, index_of(c));
    return h ^ (h >> 29);
}

std::uint64_t Relation::hash_masked(std::uint64_t mask, std::span<const ConstantId> row) const {
    std::uint64_t h = 0x84222325cbf29ce4ull;
    for (std::size_t i = 0; i < arity_; ++i)
        if (mask & (1ull << i)) h = mix(h, index_of(row[i]));
    return h;
}

bool Relation::matches(std::uint64_t mask, std::span<const ConstantId> key, std::size_t r) const {
    auto values = row(r);
    for (std::size_t i = 0; i < arity_; ++i)
        if ((mask & (1ull << i)) && values[i] != key[i]) return false;
    return true;
}

std::size_t Relation::find_slot(std::span<const ConstantId> values, std::uint64_t hash) const {
    const std::size_t cap = slots_.size();
    for (std::size_t i = hash & (cap - 1);; i = (i + 1) & (cap - 1)) {
        auto s = slots_[i];
        if (s == 0) return i;
        auto existing = row(s - 1);
        if (std::equal(existing.begin(), existing.end(), values.begin())) return i;
    }
}

void Relation::grow() {
    std::vector<std::uint32_t> old = std::move(slots_);
    slots_.assign(std::max<std::size_t>(16, old.size() * 2), 0);
    for (auto s : old)
        if (s != 0) slots_[find_slot(row(s - 1), hash_row(row(s - 1)))] = s;
}

bool Relation::contains(std::span<const ConstantId> values) const {
    if (arity_ == 0) return count_ > 0;
    if (slots_.empty()) return false;
    return slots_[find_slot(values, hash_row(values))] != 0;
}

bool Relation::insert(std::span<const ConstantId> values) {
    if (values.size() != arity_) throw EvalError("arity mismatch");
    if (arity_ == 0) {
        if (count_ > 0) return false;
        count_ = 1;
        return true;
    }
    if ((count_ + 1) * 2 > slots_.size()) grow();
    auto slot = find_slot(values, hash_row(values));
    if (slots_[slot] != 0) return false;
    auto r = static_cast<std::uint32_t>(count_);
    data_.insert(data_.end(), values.begin(), values.end());
    slots_[slot] = r + 1;
    ++count_;
    for (auto& [mask, index] : indexes_) {
        auto h = hash_masked(mask, values);
        auto [it, inserted] = index.head.try_emplace(h, r);
        index.next.push_back(inserted ? none : it->second);
        it->second = r;
    }
    return true;
}

Relation::Index& Relation::index_for(std::uint64_t mask) const {
    auto [it, inserted] = indexes_.try_emplace(mask);
    auto& index = it->second;
    if (inserted) {
        index.next.reserve(count_);
        for (std::uint32_t r = 0; r < count_; ++r) {
            auto h = hash_masked(mask, row(r));
            auto [slot, fresh] = index.head.try_emplace(h, r);
            index.next.push_back(fresh ? none : slot->second);
            slot->second = r;
        }
    }
    return index;
}

// ---------------------------------------------------------------------------
// Interpretation

const Relation* Interpretation::find(PredicateId predicate) const {
    auto it = relations_.find(predicate);
    return it == relations_.end() ? nullptr : &it->second;
}

Relation& Interpretation::relation(PredicateId predicate, std::size_t arity) {
    return relations_.try_emplace(predicate, arity).first->second;
}

bool Interpretation::contains(const Atom& ground) const {
    const auto* relation = find(ground.predicate);
    if (relation == nullptr) return false;
    Tuple row;
    for (Term t : ground.terms) row.push_back(t.constant_id());
    return relation->contains(row);
}

std::size_t Interpretation::size() const {
    std::size_t n = 0;
    for (const auto& [p, relation] : relations_) n += relation.size();
    return n;
}

std::set<Atom> Interpretation::atoms() const {
    std::set<Atom> out;
    for (const auto& [p, relation] : relations_)
        for (std::size_t i = 0; i < relation.size(); ++i) {
            Atom atom{p, {}};
            for (auto c : relation.row(i)) atom.terms.push_back(Term::constant(c));
            out.insert(std::move(atom));
        }
    return out;
}

std::vector<std::string> Interpretation::render(const SymbolTable& symbols) const {
    std::vector<std::string> out;
    for (const auto& atom : atoms()) out.push_back(render_atom(atom, symbols));
    std::sort(out.begin(), out.end());
    return out;
}

// ---------------------------------------------------------------------------
// Rule plans

namespace {

enum class StepKind { scan, negation, aggregate };

struct Step {
    StepKind kind = StepKind::scan;
    std::size_t element = 0;  // body index
    // scan
    std::uint64_t mask = 0;
    bool delta = false;
    bool recursive = false;
    // aggregate
    bool assigns = false;
};

struct Plan {
    std::vector<Step> steps;
};

struct CompiledRule {
    const Rule* rule = nullptr;
    std::size_t variable_count = 0;
    std::vector<bool> recursive;  // per body element: positive literal inside the component
    Plan full;
    std::vector<std::pair<std::size_t, Plan>> delta_plans;
};

std::size_t variable_count(const Rule& rule) {
    std::size_t n = rule.variable_names.size();
    auto see = [&](Term t) {
        if (t.is_variable()) n = std::max<std::size_t>(n, index_of(t.variable_id()) + 1);
    };
    for (Term t : rule.head.terms) see(t);
    for (const auto& element : rule.body) {
        std::vector<VariableId> vars;
        collect_variables(element, vars);
        for (auto v : vars) n = std::max<std::size_t>(n, index_of(v) + 1);
    }
    return n;
}

std::string describe(const Rule& rule, const SymbolTable& symbols) { return render_rule(rule, symbols); }

Plan make_plan(const Rule& rule, const std::vector<bool>& recursive, std::optional<std::size_t> delta,
               const SymbolTable& symbols) {
    const auto globals = global_variables(rule);
    std::set<VariableId> bound;
    std::vector<bool> placed(rule.body.size(), false);
    Plan plan;

    auto place_scan = [&](std::size_t i, bool is_delta) {
        const auto& atom = std::get<Literal>(rule.body[i]).atom;
        Step step;
        step.kind = StepKind::scan;
        step.element = i;
        step.delta = is_delta;
        step.recursive = recursive[i];
        for (std::size_t k = 0; k < atom.terms.size(); ++k) {
            Term t = atom.terms[k];
            if (t.is_constant() || bound.contains(t.variable_id())) step.mask |= 1ull << k;
        }
        auto vars = variables_of(atom);
        bound.insert(vars.begin(), vars.end());
        placed[i] = true;
        plan.steps.push_back(step);
    };

    auto ready = [&](std::size_t i) -> std::optional<Step> {
        const auto& element = rule.body[i];
        if (is_negative_literal(element)) {
            auto vars = variables_of(element);
            if (!std::includes(bound.begin(), bound.end(), vars.begin(), vars.end())) return std::nullopt;
            return Step{StepKind::negation, i};
        }
        if (const auto* aggregate = std::get_if<Aggregate>(&element)) {
            auto assignment = aggregate->assignment_variable();
            bool assigns = assignment && !bound.contains(*assignment);
            for (auto v : variables_of(element)) {
                if (!globals.contains(v) || bound.contains(v)) continue;
                if (assigns && v == *assignment) continue;
                return std::nullopt;
            }
            // The assignment variable may not feed its own aggregate.
            if (assigns) {
                std::vector<VariableId> inside;
                for (Term t : aggregate->head_terms)
                    if (t.is_variable()) inside.push_back(t.variable_id());
                collect_variables(aggregate->inner, inside);
                if (std::find(inside.begin(), inside.end(), *assignment) != inside.end()) return std::nullopt;
            }
            Step step{StepKind::aggregate, i};
            step.assigns = assigns;
            return step;
        }
        return std::nullopt;
    };

    if (delta) place_scan(*delta, true);
    while (true) {
        bool progress = false;
        for (std::size_t i = 0; i < rule.body.size(); ++i) {
            if (placed[i] || is_positive_literal(rule.body[i])) continue;
            if (auto step = ready(i)) {
                placed[i] = true;
                if (step->assigns) bound.insert(*std::get<Aggregate>(rule.body[i]).assignment_variable());
                plan.steps.push_back(*step);
                progress = true;
                break;
            }
        }
        if (progress) continue;
        auto next = std::find_if(placed.begin(), placed.end(), [&](bool p) { return !p; });
        std::size_t i = 0;
        for (; i < rule.body.size(); ++i)
            if (!placed[i] && is_positive_literal(rule.body[i])) break;
        if (i < rule.body.size()) {
            place_scan(i, false);
            continue;
        }
        if (next != placed.end()) throw EvalError("cannot order the body of rule " + describe(rule, symbols));
        break;
    }
    return plan;
}

// Evaluates the rules of one component.
class ComponentEvaluator {
public:
    ComponentEvaluator(Interpretation& model, SymbolTable& symbols, const std::set<PredicateId>& component)
        : model_(model), symbols_(symbols), component_(component) {}

    void add_rule(const Rule& rule) {
        CompiledRule compiled;
        compiled.rule = &rule;
        compiled.variable_count = variable_count(rule);
        compiled.recursive.assign(rule.body.size(), false);
        for (std::size_t i = 0; i < rule.body.size(); ++i)
            compiled.recursive[i] =
                is_positive_literal(rule.body[i]) && component_.contains(atom_of(rule.body[i]).predicate);
        compiled.full = make_plan(rule, compiled.recursive, std::nullopt, symbols_);
        for (std::size_t i = 0; i < rule.body.size(); ++i)
            if (compiled.recursive[i])
                compiled.delta_plans.emplace_back(i, make_plan(rule, compiled.recursive, i, symbols_));
        model_.relation(rule.head.predicate, rule.head.arity());
        rules_.push_back(std::move(compiled));
    }

    void run(bool semi_naive) {
        if (rules_.empty()) return;
        for (auto p : component_) delta_lo_[p] = delta_hi_[p] = size_of(p);

        for (const auto& rule : rules_) execute(rule, rule.full);
        bool changed = merge();
        bool recursive = std::any_of(rules_.begin(), rules_.end(), [](const CompiledRule& r) {
            return !r.delta_plans.empty();
        });
        while (changed && recursive) {
            for (const auto& rule : rules_) {
                if (!semi_naive) {
                    execute(rule, rule.full);
                    continue;
                }
                for (const auto& [position, plan] : rule.delta_plans) execute(rule, plan);
            }
            changed = merge();
        }
    }

private:
    std::size_t size_of(PredicateId p) const {
        const auto* relation = model_.find(p);
        return relation ? relation->size() : 0;
    }

    // Appends buffered heads; the rows added form the next delta.
    bool merge() {
        bool changed = false;
        for (auto p : component_) delta_lo_[p] = size_of(p);
        for (auto& [p, rows] : buffer_) {
            auto& relation = model_.relation(p, symbols_.predicate(p).arity);
            const auto arity = relation.arity();
            if (arity == 0) {
                if (!rows.empty() || zero_arity_.contains(p)) changed |= relation.insert({});
                continue;
            }
            for (std::size_t i = 0; i + arity <= rows.size(); i += arity)
                changed |= relation.insert(std::span<const ConstantId>(rows.data() + i, arity));
            rows.clear();
        }
        zero_arity_.clear();
        for (auto p : component_) delta_hi_[p] = size_of(p);
        return changed;
    }

    void execute(const CompiledRule& rule, const Plan& plan) {
        env_.assign(rule.variable_count, ConstantId{0});
        step(rule, plan, 0);
    }

    ConstantId value(Term t) const { return t.is_constant() ? t.constant_id() : env_[index_of(t.variable_id())]; }

    void step(const CompiledRule& rule, const Plan& plan, std::size_t k) {
        if (k == plan.steps.size()) {
            emit(rule);
            return;
        }
        const auto& s = plan.steps[k];
        const auto& element = rule.rule->body[s.element];
        switch (s.kind) {
            case StepKind::scan: scan(rule, plan, k, std::get<Literal>(element).atom, s); return;
            case StepKind::negation: {
                const auto& atom = std::get<Literal>(element).atom;
                const auto* relation = model_.find(atom.predicate);
                if (relation != nullptr) {
                    Tuple row;
                    for (Term t : atom.terms) row.push_back(value(t));
                    if (relation->contains(row)) return;
                }
                step(rule, plan, k + 1);
                return;
            }
            case StepKind::aggregate: aggregate(rule, plan, k, std::get<Aggregate>(element), s); return;
        }
    }

    void scan(const CompiledRule& rule, const Plan& plan, std::size_t k, const Atom& atom, const Step& s) {
        const auto* relation = model_.find(atom.predicate);
        if (relation == nullptr) return;
        std::size_t lo = 0, hi = relation->size();
        if (s.recursive) {
            hi = delta_hi_.at(atom.predicate);
            if (s.delta) lo = delta_lo_.at(atom.predicate);
        }
        Tuple key(atom.terms.size());
        for (std::size_t i = 0; i < atom.terms.size(); ++i)
            if (s.mask & (1ull << i)) key[i] = value(atom.terms[i]);
        relation->scan(s.mask, key, lo, hi, [&](std::size_t r) {
            auto row = relation->row(r);
            // Repeated free variables must agree.
            std::uint64_t assigned = 0;
            for (std::size_t i = 0; i < atom.terms.size(); ++i) {
                if (s.mask & (1ull << i)) continue;
                auto v = index_of(atom.terms[i].variable_id());
                bool seen = false;
                for (std::size_t j = 0; j < i; ++j)
                    if ((assigned & (1ull << j)) && atom.terms[j] == atom.terms[i]) seen = true;
                if (seen) {
                    if (env_[v] != row[i]) return;
                } else {
                    env_[v] = row[i];
                    assigned |= 1ull << i;
                }
            }
            step(rule, plan, k + 1);
        });
    }

    std::int64_t integer(ConstantId c, const char* what) const {
        if (!symbols_.is_integer(c))
            throw EvalError(std::string("type error: ") + what + " " + symbols_.constant_text(c) + " is not an integer");
        return symbols_.integer_value(c);
    }

    void aggregate(const CompiledRule& rule, const Plan& plan, std::size_t k, const Aggregate& agg, const Step& s) {
        std::int64_t sum = 0;
        if (const auto* relation = model_.find(agg.inner.predicate)) {
            // Bound inner positions: constants and global variables.
            std::uint64_t mask = 0;
            Tuple key(agg.inner.terms.size());
            const auto& globals = globals_of(rule);
            for (std::size_t i = 0; i < agg.inner.terms.size(); ++i) {
                Term t = agg.inner.terms[i];
                if (t.is_constant() || globals.contains(t.variable_id())) {
                    mask |= 1ull << i;
                    key[i] = value(t);
                }
            }
            std::set<Tuple> tuples;
            std::map<VariableId, ConstantId> local;
            relation->scan(mask, key, 0, relation->size(), [&](std::size_t r) {
                auto row = relation->row(r);
                local.clear();
                for (std::size_t i = 0; i < agg.inner.terms.size(); ++i) {
                    if (mask & (1ull << i)) continue;
                    auto [it, inserted] = local.emplace(agg.inner.terms[i].variable_id(), row[i]);
                    if (!inserted && it->second != row[i]) return;
                }
                Tuple tuple;
                for (Term t : agg.head_terms) {
                    if (t.is_variable()) {
                        auto it = local.find(t.variable_id());
                        tuple.push_back(it != local.end() ? it->second : value(t));
                    } else {
                        tuple.push_back(t.constant_id());
                    }
                }
                tuples.insert(std::move(tuple));
            });
            for (const auto& tuple : tuples) sum += integer(tuple.front(), "summed value");
        }
        if (s.assigns) {
            auto v = index_of(agg.guard.variable_id());
            env_[v] = symbols_.intern_integer(sum);
            step(rule, plan, k + 1);
            return;
        }
        if (compare(sum, agg.comparator, integer(value(agg.guard), "aggregate guard"))) step(rule, plan, k + 1);
    }

    const std::set<VariableId>& globals_of(const CompiledRule& rule) {
        auto it = globals_.find(rule.rule);
        if (it == globals_.end()) it = globals_.emplace(rule.rule, global_variables(*rule.rule)).first;
        return it->second;
    }

    void emit(const CompiledRule& rule) {
        const auto& head = rule.rule->head;
        if (head.terms.empty()) {
            zero_arity_.insert(head.predicate);
            buffer_[head.predicate];
            return;
        }
        auto& rows = buffer_[head.predicate];
        for (Term t : head.terms) rows.push_back(value(t));
    }

    Interpretation& model_;
    SymbolTable& symbols_;
    const std::set<PredicateId>& component_;
    std::vector<CompiledRule> rules_;
    std::map<PredicateId, std::size_t> delta_lo_, delta_hi_;
    std::map<PredicateId, std::vector<ConstantId>> buffer_;
    std::set<PredicateId> zero_arity_;
    std::map<const Rule*, std::set<VariableId>> globals_;
    std::vector<ConstantId> env_;
};

}  // namespace

Interpretation stable_model(const Program& program, const EvalOptions& options) {
    auto& symbols = *program.symbols;
    for (const auto& rule : program.rules) {
        auto verdict = is_safe(rule);
        if (!verdict.safe())
            throw EvalError("unsafe rule: " + render_rule(rule, symbols) + " (variable " + verdict.unsafe.front().name +
                            ")");
    }
    stratify(program);  // throws on negative or aggregate cycles

    Interpretation model;
    std::map<PredicateId, std::vector<const Rule*>> by_head;
    for (const auto& rule : program.rules) {
        if (rule.is_fact()) {
            Tuple row;
            for (Term t : rule.head.terms) row.push_back(t.constant_id());
            model.relation(rule.head.predicate, rule.head.arity()).insert(row);
        } else {
            by_head[rule.head.predicate].push_back(&rule);
        }
    }

    auto partition = sccs(DependencyGraph(program));
    for (const auto& component : partition.components) {
        std::set<PredicateId> members(component.begin(), component.end());
        ComponentEvaluator evaluator(model, symbols, members);
        for (auto p : component)
            if (auto it = by_head.find(p); it != by_head.end())
                for (const auto* rule : it->second) evaluator.add_rule(*rule);
        evaluator.run(options.semi_naive);
    }
    return model;
}

std::set<Tuple> answer(const Atom& query, const Interpretation& model) {
    std::set<Tuple> out;
    const auto* relation = model.find(query.predicate);
    if (relation == nullptr || relation->arity() != query.arity()) return out;
    for (std::size_t r = 0; r < relation->size(); ++r) {
        auto row = relation->row(r);
        std::map<VariableId, ConstantId> binding;
        bool ok = true;
        for (std::size_t i = 0; i < query.terms.size() && ok; ++i) {
            Term t = query.terms[i];
            if (t.is_constant()) {
                ok = t.constant_id() == row[i];
            } else {
                auto [it, inserted] = binding.emplace(t.variable_id(), row[i]);
                ok = inserted || it->second == row[i];
            }
        }
        if (ok) out.emplace(row.begin(), row.end());
    }
    if (query.arity() == 0 && !relation->empty()) out.insert(Tuple{});
    return out;
}

std::set<Tuple> answer(const Atom& query, const Program& program, const EvalOptions& options) {
    return answer(query, stable_model(program, options));
}

std::vector<std::string> format_answers(const Atom& query, const std::set<Tuple>& tuples, const SymbolTable& symbols) {
    std::vector<std::string> out;
    for (const auto& tuple : tuples) {
        Atom atom{query.predicate, {}};
        for (auto c : tuple) atom.terms.push_back(Term::constant(c));
        out.push_back(render_atom(atom, symbols));
    }
    std::sort(out.begin(), out.end());
    return out;
}

// ---------------------------------------------------------------------------
// Oracle support

namespace {

Term substitute(Term t, const std::map<VariableId, ConstantId>& sigma) {
    if (!t.is_variable()) return t;
    auto it = sigma.find(t.variable_id());
    return it == sigma.end() ? t : Term::constant(it->second);
}

Atom substitute(const Atom& atom, const std::map<VariableId, ConstantId>& sigma) {
    Atom out{atom.predicate, {}};
    for (Term t : atom.terms) out.terms.push_back(substitute(t, sigma));
    return out;
}

}  // namespace

std::vector<ConstantId> program_constants(const Program& program) {
    std::set<ConstantId> out;
    auto add = [&](const std::vector<Term>& terms) {
        for (Term t : terms)
            if (t.is_constant()) out.insert(t.constant_id());
    };
    for (const auto& rule : program.rules) {
        add(rule.head.terms);
        for (const auto& element : rule.body) {
            add(atom_of(element).terms);
            if (const auto* aggregate = std::get_if<Aggregate>(&element)) {
                add(aggregate->head_terms);
                add({aggregate->guard});
            }
        }
    }
    return {out.begin(), out.end()};
}

std::vector<GroundRule> naive_ground(const Program& program, const std::vector<ConstantId>& domain,
                                     std::size_t limit) {
    std::vector<GroundRule> out;
    for (const auto& rule : program.rules) {
        auto globals = global_variables(rule);
        std::vector<VariableId> vars(globals.begin(), globals.end());
        std::size_t count = 1;
        for (std::size_t i = 0; i < vars.size(); ++i) {
            if (domain.empty()) {
                count = 0;
                break;
            }
            count *= domain.size();
            if (count > limit) throw GroundingLimit("grounding exceeds limit");
        }
        if (vars.empty()) count = 1;
        if (out.size() + count > limit) throw GroundingLimit("grounding exceeds limit");

        std::vector<std::size_t> digits(vars.size(), 0);
        for (std::size_t n = 0; n < count; ++n) {
            std::map<VariableId, ConstantId> sigma;
            for (std::size_t i = 0; i < vars.size(); ++i) sigma[vars[i]] = domain[digits[i]];
            GroundRule ground;
            ground.head = substitute(rule.head, sigma);
            for (const auto& element : rule.body) {
                if (const auto* literal = std::get_if<Literal>(&element)) {
                    ground.literals.push_back(Literal{substitute(literal->atom, sigma), literal->negated});
                } else {
                    auto aggregate = std::get<Aggregate>(element);
                    for (auto& t : aggregate.head_terms) t = substitute(t, sigma);
                    aggregate.inner = substitute(aggregate.inner, sigma);
                    aggregate.guard = substitute(aggregate.guard, sigma);
                    ground.aggregates.push_back(std::move(aggregate));
                }
            }
            out.push_back(std::move(ground));
            for (std::size_t i = 0; i < digits.size(); ++i) {
                if (++digits[i] < domain.size()) break;
                digits[i] = 0;
            }
        }
    }
    return out;
}

std::vector<GroundRule> naive_ground(const Program& program, std::size_t limit) {
    return naive_ground(program, program_constants(program), limit);
}

namespace {

// Instances of an aggregate's inner atom among `atoms`, as t' tuples.
std::vector<std::pair<const Atom*, Tuple>> aggregate_matches(const std::vector<const Atom*>& atoms,
                                                             const Aggregate& aggregate) {
    std::vector<std::pair<const Atom*, Tuple>> out;
    for (const auto* atom : atoms) {
        if (atom->predicate != aggregate.inner.predicate || atom->arity() != aggregate.inner.arity()) continue;
        std::map<VariableId, ConstantId> local;
        bool ok = true;
        for (std::size_t i = 0; i < atom->arity() && ok; ++i) {
            Term t = aggregate.inner.terms[i];
            auto c = atom->terms[i].constant_id();
            if (t.is_constant()) {
                ok = t.constant_id() == c;
            } else {
                auto [it, inserted] = local.emplace(t.variable_id(), c);
                ok = inserted || it->second == c;
            }
        }
        if (!ok) continue;
        Tuple tuple;
        for (Term t : aggregate.head_terms) {
            if (t.is_constant()) {
                tuple.push_back(t.constant_id());
            } else {
                auto it = local.find(t.variable_id());
                if (it == local.end()) throw EvalError("unsafe local variable in ground aggregate");
                tuple.push_back(it->second);
            }
        }
        out.emplace_back(atom, std::move(tuple));
    }
    return out;
}

bool compare_guard(std::int64_t sum, const Aggregate& aggregate, const SymbolTable& symbols) {
    auto guard = aggregate.guard.constant_id();
    if (!symbols.is_integer(guard)) return aggregate.comparator == Comparator::not_equal;
    return compare(sum, aggregate.comparator, symbols.integer_value(guard));
}

std::int64_t sum_of(const std::set<Tuple>& tuples, const SymbolTable& symbols) {
    std::int64_t sum = 0;
    for (const auto& tuple : tuples) {
        if (!symbols.is_integer(tuple.front())) throw EvalError("type error: summed value is not an integer");
        sum += symbols.integer_value(tuple.front());
    }
    return sum;
}

}  // namespace

bool satisfies(const std::set<Atom>& interpretation, const Aggregate& aggregate, const SymbolTable& symbols) {
    std::vector<const Atom*> atoms;
    for (const auto& atom : interpretation)
        if (atom.predicate == aggregate.inner.predicate) atoms.push_back(&atom);
    std::set<Tuple> tuples;
    for (auto& [atom, tuple] : aggregate_matches(atoms, aggregate)) tuples.insert(tuple);
    return compare_guard(sum_of(tuples, symbols), aggregate, symbols);
}

bool is_stable_model(const std::vector<GroundRule>& ground, const std::set<Atom>& candidate,
                     const SymbolTable& symbols, std::size_t max_free_atoms) {
    auto body_true = [&](const GroundRule& rule) {
        for (const auto& literal : rule.literals)
            if (candidate.contains(literal.atom) == literal.negated) return false;
        for (const auto& aggregate : rule.aggregates)
            if (!satisfies(candidate, aggregate, symbols)) return false;
        return true;
    };

    std::vector<const GroundRule*> reduct;
    for (const auto& rule : ground) {
        if (!body_true(rule)) continue;
        if (!candidate.contains(rule.head)) return false;
        reduct.push_back(&rule);
    }

    // Atoms forced by bodiless reduct rules belong to every model of the
    // reduct; the rest are enumerated.
    std::set<Atom> fixed;
    for (const auto* rule : reduct)
        if (rule->literals.empty() && rule->aggregates.empty()) fixed.insert(rule->head);
    std::vector<const Atom*> free_atoms;
    std::map<Atom, std::size_t> bit;
    for (const auto& atom : candidate)
        if (!fixed.contains(atom)) {
            bit.emplace(atom, free_atoms.size());
            free_atoms.push_back(&atom);
        }
    if (free_atoms.size() > max_free_atoms) throw GroundingLimit("too many atoms for the minimality check");
    if (free_atoms.empty()) return true;

    // Membership of an atom in J = fixed ∪ {free atoms selected by mask}:
    // -1 never (outside the candidate), -2 always (fixed), else a bit.
    auto code = [&](const Atom& atom) -> long {
        if (fixed.contains(atom)) return -2;
        auto it = bit.find(atom);
        return it == bit.end() ? -1 : static_cast<long>(it->second);
    };
    struct Compiled {
        long head;
        std::vector<std::pair<long, bool>> literals;
        std::vector<std::pair<const Aggregate*, std::vector<std::pair<long, Tuple>>>> aggregates;
    };
    std::vector<const Atom*> candidate_atoms;
    for (const auto& atom : candidate) candidate_atoms.push_back(&atom);
    std::vector<Compiled> rules;
    for (const auto* rule : reduct) {
        if (rule->literals.empty() && rule->aggregates.empty()) continue;
        Compiled c{code(rule->head), {}, {}};
        for (const auto& literal : rule->literals) c.literals.emplace_back(code(literal.atom), literal.negated);
        for (const auto& aggregate : rule->aggregates) {
            std::vector<std::pair<long, Tuple>> matches;
            for (auto& [atom, tuple] : aggregate_matches(candidate_atoms, aggregate))
                matches.emplace_back(code(*atom), std::move(tuple));
            c.aggregates.emplace_back(&aggregate, std::move(matches));
        }
        rules.push_back(std::move(c));
    }

    auto in = [](long c, std::uint64_t mask) { return c == -2 || (c >= 0 && ((mask >> c) & 1)); };
    const std::uint64_t full = (free_atoms.size() == 64) ? ~0ull : (1ull << free_atoms.size()) - 1;
    for (std::uint64_t mask = 0; mask < full; ++mask) {
        bool model = true;
        for (const auto& rule : rules) {
            bool body = true;
            for (auto [c, negated] : rule.literals)
                if (in(c, mask) == negated) {
                    body = false;
                    break;
                }
            for (std::size_t a = 0; body && a < rule.aggregates.size(); ++a) {
                std::set<Tuple> tuples;
                for (const auto& [c, tuple] : rule.aggregates[a].second)
                    if (in(c, mask)) tuples.insert(tuple);
                body = compare_guard(sum_of(tuples, symbols), *rule.aggregates[a].first, symbols);
            }
            if (body && !in(rule.head, mask)) {
                model = false;
                break;
            }
        }
        if (model) return false;
    }
    return true;
}

}  // namespace magicdl
