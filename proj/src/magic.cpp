#include "magicdl/magic.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <optional>
#include <sstream>
#include <unordered_set>

#include "magicdl/depgraph.hpp"

namespace magicdl {

Adornment query_adornment(const Atom& query) {
    Adornment out;
    for (Term t : query.terms) out += t.is_constant() ? 'b' : 'f';
    return out;
}

Atom magic_atom(const Atom& atom, const Adornment& adornment, SymbolTable& symbols) {
    if (adornment.size() != atom.arity()) throw std::invalid_argument("adornment does not fit atom");
    Atom out;
    out.predicate = symbols.intern_magic(atom.predicate, adornment);
    for (std::size_t i = 0; i < adornment.size(); ++i)
        if (adornment[i] == 'b') out.terms.push_back(atom.terms[i]);
    return out;
}

// ---------------------------------------------------------------------------
// SIPS

namespace {

std::set<VariableId> bound_head_variables(const Rule& rule, const Adornment& adornment) {
    std::set<VariableId> out;
    for (std::size_t i = 0; i < adornment.size() && i < rule.head.terms.size(); ++i)
        if (adornment[i] == 'b' && rule.head.terms[i].is_variable()) out.insert(rule.head.terms[i].variable_id());
    return out;
}

// Global variables of an aggregate other than its assignment variable: the
// inner-atom and head-term variables that also occur outside the aggregate.
std::set<VariableId> aggregate_inputs(const Aggregate& aggregate, const std::set<VariableId>& globals) {
    std::set<VariableId> out;
    for (auto v : variables_of(BodyElement{aggregate}))
        if (globals.contains(v) && aggregate.assignment_variable() != v) out.insert(v);
    return out;
}

bool covers(const std::set<VariableId>& bound, const std::set<VariableId>& needed) {
    return std::includes(bound.begin(), bound.end(), needed.begin(), needed.end());
}

bool intersects(const std::set<VariableId>& a, const std::set<VariableId>& b) {
    return std::any_of(a.begin(), a.end(), [&](VariableId v) { return b.contains(v); });
}

}  // namespace

Sips default_sips(const Rule& rule, const Adornment& adornment, SipsStrategy strategy) {
    const std::size_t n = rule.body.size() + 1;
    Sips sips;
    sips.before.assign(n, std::vector<bool>(n, false));
    sips.bnd.assign(n, {});
    sips.bnd[0] = bound_head_variables(rule, adornment);
    for (std::size_t j = 1; j < n; ++j) sips.before[0][j] = true;

    const auto globals = global_variables(rule);
    std::set<VariableId> bound = sips.bnd[0];
    std::vector<bool> binder(n, false);
    for (std::size_t i = 1; i < n; ++i) {
        const auto& element = rule.body[i - 1];
        if (is_positive_literal(element)) {
            binder[i] = true;
            sips.bnd[i] = variables_of(element);
        } else if (const auto* aggregate = std::get_if<Aggregate>(&element)) {
            auto var = aggregate->assignment_variable();
            if (var && covers(bound, aggregate_inputs(*aggregate, globals))) {
                binder[i] = true;
                sips.bnd[i] = {*var};
            }
        }
        bound.insert(sips.bnd[i].begin(), sips.bnd[i].end());
    }

    for (std::size_t i = 1; i < n; ++i) {
        const auto vars = variables_of(rule.body[i - 1]);
        for (std::size_t j = 1; j < i; ++j) {
            if (!binder[j]) continue;
            if (strategy == SipsStrategy::textual) {
                sips.before[j][i] = true;
                continue;
            }
            if (!intersects(sips.bnd[j], vars)) continue;
            sips.before[j][i] = true;
            // Transitive closure: everything preceding j precedes i.
            for (std::size_t k = 1; k < j; ++k)
                if (sips.before[k][j]) sips.before[k][i] = true;
        }
    }
    return sips;
}

std::vector<std::string> sips_violations(const Rule& rule, const Adornment& adornment, const Sips& sips) {
    std::vector<std::string> out;
    const std::size_t n = rule.body.size() + 1;
    if (sips.size() != n || sips.before.size() != n) {
        out.push_back("size mismatch");
        return out;
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (sips.before[i][i]) out.push_back("element " + std::to_string(i) + " precedes itself");
        for (std::size_t j = 0; j < n; ++j) {
            if (!sips.before[i][j]) continue;
            if (sips.before[j][i]) out.push_back("cycle between " + std::to_string(i) + " and " + std::to_string(j));
            for (std::size_t k = 0; k < n; ++k)
                if (sips.before[j][k] && !sips.before[i][k]) out.push_back("order is not transitive");
        }
    }
    for (std::size_t j = 1; j < n; ++j)
        if (!sips.before[0][j]) out.push_back("head does not precede element " + std::to_string(j));

    for (std::size_t i = 1; i < n; ++i) {
        const auto& element = rule.body[i - 1];
        const auto* aggregate = std::get_if<Aggregate>(&element);
        bool assignment = aggregate != nullptr && aggregate->assignment_variable().has_value();
        bool precedes_something = std::any_of(sips.before[i].begin(), sips.before[i].end(), [](bool b) { return b; });
        if (precedes_something && !is_positive_literal(element) && !assignment)
            out.push_back("element " + std::to_string(i) + " passes bindings but is not a binder");
        if (is_negative_literal(element) || (aggregate != nullptr && !assignment)) {
            if (!sips.bnd[i].empty()) out.push_back("element " + std::to_string(i) + " cannot bind variables");
        } else if (assignment) {
            for (auto v : sips.bnd[i])
                if (v != *aggregate->assignment_variable())
                    out.push_back("aggregate " + std::to_string(i) + " binds a non-assignment variable");
        } else {
            auto vars = variables_of(element);
            if (!covers(vars, sips.bnd[i])) out.push_back("element " + std::to_string(i) + " binds foreign variables");
        }
    }
    if (!covers(sips.bnd[0], bound_head_variables(rule, adornment))) out.push_back("head misses bound variables");
    if (!covers(variables_of(rule.head), sips.bnd[0])) out.push_back("head binds foreign variables");
    return out;
}

std::string RewriteStats::to_key_values() const {
    std::ostringstream out;
    out << "adorned_predicates=" << adorned_predicates << "\n"
        << "modified_rules=" << modified_rules << "\n"
        << "magic_rules=" << magic_rules << "\n"
        << "discarded_sips_arcs=" << discarded_sips_arcs << "\n";
    return out.str();
}

// ---------------------------------------------------------------------------
// MS and MS-RS

namespace {

class Rewriter {
public:
    Rewriter(const Program& program, const RewriteOptions& options, bool restrict)
        : input_(program), options_(options), restrict_(restrict), output_(program.empty_like()) {}

    RewriteResult run(const Atom& query) {
        auto& symbols = *input_.symbols;
        if (index_of(query.predicate) >= symbols.predicate_count() || !input_.predicates().contains(query.predicate)) {
            std::string name = index_of(query.predicate) < symbols.predicate_count()
                                   ? symbols.predicate_name(query.predicate)
                                   : "#" + std::to_string(index_of(query.predicate));
            throw UnknownQueryPredicate(name + "/" + std::to_string(query.arity()));
        }

        classes_ = classify_predicates(input_);
        if (!classes_.intentional.contains(query.predicate)) {
            RewriteResult result{input_, {}, false};
            return result;
        }

        // Extensional facts are kept so the rewritten program stands alone.
        // They are ground and never rewritten, so they bypass the dedupe keys.
        std::map<PredicateId, std::vector<const Rule*>> by_head;
        for (const auto& rule : input_.rules) {
            if (rule.is_fact() && classes_.extensional.contains(rule.head.predicate))
                output_.rules.push_back(rule);
            else
                by_head[rule.head.predicate].push_back(&rule);
        }

        if (restrict_) {
            // Same graph as DependencyGraph(input_) without another pass over the facts.
            for (auto p : classes_.intentional) graph_.add_node(p);
            for (auto p : classes_.extensional) graph_.add_node(p);
            for (const auto& [head, rules] : by_head)
                for (const auto* rule : rules)
                    for (const auto& element : rule->body)
                        graph_.add_arc(head, atom_of(element).predicate, is_positive_literal(element) ? 0 : 1);
            monitor_.emplace(graph_);
            if (options_.monitor == MonitorMode::upfront) add_reachable_representative_arcs(query.predicate);
        }

        const auto adornment = query_adornment(query);
        Rule seed;
        seed.head = magic_atom(query, adornment, symbols);
        emit(seed);
        enqueue({query.predicate, adornment});

        while (!worklist_.empty()) {
            auto current = worklist_.front();
            worklist_.pop_front();
            for (const auto* rule : by_head[current.predicate]) process(*rule, current.adornment);
        }

        RewriteResult result{std::move(output_), stats_, false};
        result.stats.adorned_predicates = seen_.size();
        if (monitor_) result.monitor_broken = !monitor_->projection_matches_original();
        return result;
    }

private:
    void enqueue(const AdornedPredicate& adorned) {
        if (seen_.insert(adorned).second) worklist_.push_back(adorned);
    }

    bool emit(const Rule& rule) {
        auto canonical = canonicalize(rule);
        if (!keys_.insert(structural_key(canonical)).second) return false;
        output_.rules.push_back(std::move(canonical));
        return true;
    }

    void add_reachable_representative_arcs(PredicateId query) {
        std::set<PredicateId> reachable{query};
        std::vector<PredicateId> work{query};
        while (!work.empty()) {
            auto p = work.back();
            work.pop_back();
            for (const auto& arc : graph_.arcs())
                if (arc.from == p && reachable.insert(arc.to).second) work.push_back(arc.to);
        }
        // One arc per body occurrence q :- ..., p, ... with q reachable.
        for (const auto& arc : graph_.arcs())
            if (reachable.contains(arc.from) && classes_.intentional.contains(arc.to))
                monitor_->add_representative_arc(arc.to, arc.from);
    }

    bool accept_binding(PredicateId p, PredicateId target) {
        bool ok = monitor_->preserves_components(p, target);
        if (options_.validate_monitor && ok != monitor_->preserves_components_by_recomputation(p, target))
            throw std::logic_error("SCC monitor disagrees with recomputation");
        if (ok) monitor_->add_binding_arc(p, target);
        return ok;
    }

    void process(const Rule& rule, const Adornment& adornment) {
        auto& symbols = *input_.symbols;
        const auto head_magic = magic_atom(rule.head, adornment, symbols);

        Rule modified;
        modified.head = rule.head;
        modified.body.push_back(Literal{head_magic, false});
        modified.body.insert(modified.body.end(), rule.body.begin(), rule.body.end());
        modified.variable_names = rule.variable_names;
        if (emit(modified)) ++stats_.modified_rules;

        const auto sips = default_sips(rule, adornment, options_.sips);
        const auto globals = global_variables(rule);
        const auto q = rule.head.predicate;

        for (std::size_t i = 1; i <= rule.body.size(); ++i) {
            const auto& target = atom_of(rule.body[i - 1]);
            const auto p = target.predicate;
            if (!classes_.intentional.contains(p)) continue;

            if (restrict_ && options_.monitor == MonitorMode::on_demand) monitor_->add_representative_arc(p, q);

            std::vector<std::size_t> chosen;
            std::set<VariableId> bound = sips.bnd[0];
            for (std::size_t j = 1; j < i; ++j) {
                if (!sips.precedes(j, i)) continue;
                const auto& element = rule.body[j - 1];
                if (restrict_) {
                    // An assignment whose inputs lost their binders would sum
                    // over a different set.
                    if (const auto* aggregate = std::get_if<Aggregate>(&element);
                        aggregate != nullptr && !covers(bound, aggregate_inputs(*aggregate, globals))) {
                        ++stats_.discarded_sips_arcs;
                        continue;
                    }
                    if (!accept_binding(p, atom_of(element).predicate)) {
                        ++stats_.discarded_sips_arcs;
                        continue;
                    }
                }
                chosen.push_back(j);
                bound.insert(sips.bnd[j].begin(), sips.bnd[j].end());
            }

            Adornment next;
            for (Term t : target.terms)
                next += (t.is_constant() || bound.contains(t.variable_id())) ? 'b' : 'f';

            Rule magic;
            magic.head = magic_atom(target, next, symbols);
            magic.body.push_back(Literal{head_magic, false});
            for (auto j : chosen) magic.body.push_back(rule.body[j - 1]);
            magic.variable_names = rule.variable_names;
            if (emit(magic)) ++stats_.magic_rules;
            enqueue({p, next});
        }
    }

    const Program& input_;
    RewriteOptions options_;
    bool restrict_;
    Program output_;
    RewriteStats stats_;
    PredicateClasses classes_;
    DependencyGraph graph_;
    std::optional<SccMonitor> monitor_;
    std::deque<AdornedPredicate> worklist_;
    std::set<AdornedPredicate> seen_;
    std::unordered_set<std::vector<std::uint32_t>, StructuralKeyHash> keys_;
};

}  // namespace

RewriteResult ms(const Atom& query, const Program& program, const RewriteOptions& options) {
    return Rewriter(program, options, false).run(query);
}

RewriteResult ms_rs(const Atom& query, const Program& program, const RewriteOptions& options) {
    return Rewriter(program, options, true).run(query);
}

// ---------------------------------------------------------------------------
// FullFree

Program full_free(Program program) {
    auto& symbols = *program.symbols;
    auto all_free = [](const std::string& s) { return std::all_of(s.begin(), s.end(), [](char c) { return c == 'f'; }); };

    // Facts over ordinary predicates are left alone; only the other rules are revisited.
    std::vector<char> occurs(symbols.predicate_count(), 0);
    std::vector<std::size_t> touched;
    for (std::size_t i = 0; i < program.rules.size(); ++i) {
        const auto& rule = program.rules[i];
        auto head = index_of(rule.head.predicate);
        // 2 marks a predicate last seen as the head of an ordinary fact.
        if (rule.body.empty() && occurs[head] == 2) continue;
        bool plain = rule.body.empty() && !symbols.is_magic(rule.head.predicate);
        occurs[head] = plain ? 2 : 1;
        for (const auto& element : rule.body) occurs[index_of(atom_of(element).predicate)] = 1;
        if (!plain) touched.push_back(i);
    }
    std::set<PredicateId> flagged;
    for (std::uint32_t i = 0; i < occurs.size(); ++i) {
        const auto& magic = symbols.predicate(PredicateId{i}).magic;
        if (occurs[i] && magic && all_free(magic->adornment)) flagged.insert(magic->base);
    }
    if (flagged.empty()) return program;

    // m#p#s with p flagged and s not all-free. Predicates interned below are
    // all-free and never folded.
    std::vector<char> folds(symbols.predicate_count(), 0);
    for (std::uint32_t i = 0; i < folds.size(); ++i) {
        const auto& magic = symbols.predicate(PredicateId{i}).magic;
        folds[i] = magic && flagged.contains(magic->base) && !all_free(magic->adornment);
    }
    auto folded = [&](PredicateId id) { return index_of(id) < folds.size() && folds[index_of(id)]; };

    // Folding only creates duplicates among magic rules and rules with a body.
    std::unordered_set<std::vector<std::uint32_t>, StructuralKeyHash> keys;
    auto& rules = program.rules;
    std::vector<std::size_t> dropped;
    for (auto i : touched) {
        auto& rule = rules[i];
        if (std::any_of(rule.body.begin(), rule.body.end(),
                        [&](const BodyElement& e) { return folded(atom_of(e).predicate); })) {
            dropped.push_back(i);
            continue;
        }
        if (folded(rule.head.predicate)) {
            const auto& magic = *symbols.predicate(rule.head.predicate).magic;
            rule.head.predicate = symbols.intern_magic(magic.base, std::string(magic.adornment.size(), 'f'));
            rule.head.terms.clear();
        }
        if (!keys.insert(structural_key(canonicalize(rule))).second) dropped.push_back(i);
    }
    if (dropped.empty()) return program;

    // Compacts in place from the first dropped rule; the facts before it stay put.
    std::size_t kept = dropped.front();
    auto next = dropped.begin();
    for (std::size_t i = kept; i < rules.size(); ++i) {
        if (next != dropped.end() && *next == i) {
            ++next;
            continue;
        }
        rules[kept++] = std::move(rules[i]);
    }
    rules.erase(rules.begin() + static_cast<std::ptrdiff_t>(kept), rules.end());
    return program;
}

}  // namespace magicdl
