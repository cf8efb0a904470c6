#include "magicdl/depgraph.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <optional>
#include <queue>
#include <sstream>

namespace magicdl {

std::vector<std::vector<std::uint32_t>> strongly_connected_components(
    const std::vector<std::vector<std::uint32_t>>& adjacency) {
    // Iterative Tarjan; components come out sinks first.
    constexpr auto unvisited = std::numeric_limits<std::uint32_t>::max();
    const auto n = static_cast<std::uint32_t>(adjacency.size());
    std::vector<std::uint32_t> index(n, unvisited), low(n, 0);
    std::vector<bool> on_stack(n, false);
    std::vector<std::uint32_t> stack;
    std::vector<std::vector<std::uint32_t>> components;
    std::uint32_t counter = 0;

    struct Frame {
        std::uint32_t node;
        std::size_t next;
    };
    std::vector<Frame> frames;

    for (std::uint32_t root = 0; root < n; ++root) {
        if (index[root] != unvisited) continue;
        frames.push_back({root, 0});
        index[root] = low[root] = counter++;
        stack.push_back(root);
        on_stack[root] = true;
        while (!frames.empty()) {
            auto& frame = frames.back();
            const auto& out = adjacency[frame.node];
            if (frame.next < out.size()) {
                auto to = out[frame.next++];
                if (index[to] == unvisited) {
                    index[to] = low[to] = counter++;
                    stack.push_back(to);
                    on_stack[to] = true;
                    frames.push_back({to, 0});
                } else if (on_stack[to]) {
                    low[frame.node] = std::min(low[frame.node], index[to]);
                }
                continue;
            }
            auto node = frame.node;
            frames.pop_back();
            if (!frames.empty()) low[frames.back().node] = std::min(low[frames.back().node], low[node]);
            if (low[node] == index[node]) {
                std::vector<std::uint32_t> component;
                std::uint32_t member;
                do {
                    member = stack.back();
                    stack.pop_back();
                    on_stack[member] = false;
                    component.push_back(member);
                } while (member != node);
                std::sort(component.begin(), component.end());
                components.push_back(std::move(component));
            }
        }
    }
    return components;
}

DependencyGraph::DependencyGraph(const Program& program) {
    std::optional<PredicateId> last;
    for (const auto& rule : program.rules) {
        // Runs of facts over one predicate are the common case.
        if (rule.body.empty() && rule.head.predicate == last) continue;
        last = rule.body.empty() ? std::optional{rule.head.predicate} : std::nullopt;
        nodes_.insert(rule.head.predicate);
        for (const auto& element : rule.body)
            add_arc(rule.head.predicate, atom_of(element).predicate, is_positive_literal(element) ? 0 : 1);
    }
}

void DependencyGraph::add_arc(PredicateId from, PredicateId to, int weight) {
    nodes_.insert(from);
    nodes_.insert(to);
    arcs_.insert({from, to, weight});
}

std::string DependencyGraph::to_dot(const SymbolTable& symbols) const {
    std::ostringstream out;
    out << "digraph dependencies {\n";
    for (auto p : nodes_) out << "  \"" << symbols.predicate_name(p) << "\";\n";
    for (const auto& arc : arcs_) {
        out << "  \"" << symbols.predicate_name(arc.from) << "\" -> \"" << symbols.predicate_name(arc.to) << "\"";
        if (arc.weight > 0) out << " [style=dashed, label=\"1\"]";
        out << ";\n";
    }
    out << "}\n";
    return out.str();
}

namespace {

struct DenseGraph {
    std::vector<PredicateId> predicate_of;
    std::map<PredicateId, std::uint32_t> dense;
    std::vector<std::vector<std::uint32_t>> adjacency;
};

DenseGraph densify(const DependencyGraph& graph) {
    DenseGraph out;
    for (auto p : graph.nodes()) {
        out.dense.emplace(p, static_cast<std::uint32_t>(out.predicate_of.size()));
        out.predicate_of.push_back(p);
    }
    out.adjacency.resize(out.predicate_of.size());
    for (const auto& arc : graph.arcs()) out.adjacency[out.dense.at(arc.from)].push_back(out.dense.at(arc.to));
    for (auto& list : out.adjacency) {
        std::sort(list.begin(), list.end());
        list.erase(std::unique(list.begin(), list.end()), list.end());
    }
    return out;
}

}  // namespace

SccPartition sccs(const DependencyGraph& graph) {
    auto dense = densify(graph);
    auto raw = strongly_connected_components(dense.adjacency);

    // Order the condensation: a component is ready once everything it depends
    // on is placed; among ready components pick the smallest predicate id.
    std::vector<std::size_t> component_of(dense.predicate_of.size());
    for (std::size_t c = 0; c < raw.size(); ++c)
        for (auto node : raw[c]) component_of[node] = c;
    std::vector<std::set<std::size_t>> depends(raw.size()), dependents(raw.size());
    for (std::uint32_t from = 0; from < dense.adjacency.size(); ++from)
        for (auto to : dense.adjacency[from]) {
            auto cf = component_of[from], ct = component_of[to];
            if (cf == ct) continue;
            depends[cf].insert(ct);
            dependents[ct].insert(cf);
        }
    auto min_predicate = [&](std::size_t c) { return dense.predicate_of[raw[c].front()]; };
    using Entry = std::pair<std::uint32_t, std::size_t>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> ready;
    std::vector<std::size_t> pending(raw.size());
    for (std::size_t c = 0; c < raw.size(); ++c) {
        pending[c] = depends[c].size();
        if (pending[c] == 0) ready.push({index_of(min_predicate(c)), c});
    }

    SccPartition partition;
    while (!ready.empty()) {
        auto c = ready.top().second;
        ready.pop();
        std::vector<PredicateId> component;
        for (auto node : raw[c]) component.push_back(dense.predicate_of[node]);
        std::sort(component.begin(), component.end());
        for (auto p : component) partition.component_of[p] = partition.components.size();
        partition.components.push_back(std::move(component));
        for (auto d : dependents[c])
            if (--pending[d] == 0) ready.push({index_of(min_predicate(d)), d});
    }
    return partition;
}

bool is_stratified(const DependencyGraph& graph) {
    auto partition = sccs(graph);
    return std::none_of(graph.arcs().begin(), graph.arcs().end(), [&](const DependencyArc& arc) {
        return arc.weight > 0 && partition.same_component(arc.from, arc.to);
    });
}

UnstratifiableError::UnstratifiableError(std::vector<PredicateId> cycle, const std::string& description)
    : std::runtime_error("program is not stratified: cycle " + description), cycle_(std::move(cycle)) {}

namespace {

// Path from `from` to `to` inside one component, as a list of predicates
// starting at `from` and ending at `to`.
std::vector<PredicateId> path_within(const DependencyGraph& graph, const SccPartition& partition, PredicateId from,
                                     PredicateId to) {
    std::map<PredicateId, std::vector<PredicateId>> successors;
    for (const auto& arc : graph.arcs())
        if (partition.same_component(arc.from, from) && partition.same_component(arc.to, from))
            successors[arc.from].push_back(arc.to);
    std::map<PredicateId, PredicateId> parent;
    std::deque<PredicateId> queue{from};
    parent.emplace(from, from);
    while (!queue.empty()) {
        auto p = queue.front();
        queue.pop_front();
        if (p == to) break;
        for (auto q : successors[p])
            if (parent.emplace(q, p).second) queue.push_back(q);
    }
    std::vector<PredicateId> path{to};
    while (path.back() != from) path.push_back(parent.at(path.back()));
    std::reverse(path.begin(), path.end());
    return path;
}

}  // namespace

std::vector<std::vector<PredicateId>> stratify(const Program& program) {
    DependencyGraph graph(program);
    auto partition = sccs(graph);

    for (const auto& arc : graph.arcs()) {
        if (arc.weight == 0 || !partition.same_component(arc.from, arc.to)) continue;
        // arc.from -> arc.to has weight 1; close the cycle back to arc.from.
        auto back = path_within(graph, partition, arc.to, arc.from);
        std::vector<PredicateId> cycle{arc.from};
        cycle.insert(cycle.end(), back.begin(), back.end());
        std::string description;
        for (std::size_t i = 0; i < cycle.size(); ++i) {
            if (i > 0) description += i == 1 ? " -(not)-> " : " -> ";
            description += program.symbols->predicate_name(cycle[i]);
        }
        throw UnstratifiableError(std::move(cycle), description);
    }

    // Level of a component: longest weighted path to a sink.
    std::vector<int> level(partition.components.size(), 0);
    std::vector<std::vector<std::pair<std::size_t, int>>> out(partition.components.size());
    for (const auto& arc : graph.arcs()) {
        auto cf = partition.component_of.at(arc.from), ct = partition.component_of.at(arc.to);
        if (cf != ct) out[cf].push_back({ct, arc.weight});
    }
    int top = 0;
    for (std::size_t c = 0; c < partition.components.size(); ++c) {
        for (auto [d, w] : out[c]) level[c] = std::max(level[c], level[d] + w);
        top = std::max(top, level[c]);
    }
    std::vector<std::vector<PredicateId>> strata(partition.components.empty() ? 0 : top + 1);
    for (std::size_t c = 0; c < partition.components.size(); ++c)
        for (auto p : partition.components[c]) strata[level[c]].push_back(p);
    for (auto& stratum : strata) std::sort(stratum.begin(), stratum.end());
    return strata;
}

// ---------------------------------------------------------------------------
// SccMonitor

SccMonitor::SccMonitor(const DependencyGraph& original) {
    for (auto p : original.nodes()) dense_.emplace(p, static_cast<std::uint32_t>(dense_.size()));
    original_count_ = dense_.size();
    adjacency_.resize(2 * original_count_);
    for (const auto& arc : original.arcs()) adjacency_[node_of(arc.from)].push_back(node_of(arc.to));
    for (const auto& [p, node] : dense_) adjacency_[node].push_back(representative_of(p));

    std::vector<std::vector<std::uint32_t>> base(adjacency_.begin(), adjacency_.begin() + original_count_);
    for (auto& list : base)
        list.erase(std::remove_if(list.begin(), list.end(), [&](auto v) { return v >= original_count_; }),
                   list.end());
    original_component_.assign(original_count_, 0);
    auto components = strongly_connected_components(base);
    for (std::size_t c = 0; c < components.size(); ++c)
        for (auto node : components[c]) original_component_[node] = static_cast<std::uint32_t>(c);
}

void SccMonitor::add_representative_arc(PredicateId from, PredicateId to) {
    auto& list = adjacency_[representative_of(from)];
    auto target = representative_of(to);
    if (std::find(list.begin(), list.end(), target) == list.end()) {
        list.push_back(target);
        dirty_ = true;
    }
}

void SccMonitor::add_binding_arc(PredicateId rep, PredicateId target) {
    auto& list = adjacency_[representative_of(rep)];
    auto node = node_of(target);
    if (std::find(list.begin(), list.end(), node) != list.end()) return;
    list.push_back(node);
    // An arc approved by preserves_components keeps the projection intact.
    if (approved_ != std::pair{rep, target}) dirty_ = true;
    approved_.reset();
}

bool SccMonitor::preserves_components(PredicateId rep, PredicateId target) const {
    const auto source = node_of(target);
    const auto sink = representative_of(rep);
    const auto n = adjacency_.size();
    approved_.reset();
    if (!projection_matches_original()) return false;

    std::vector<bool> forward(n, false);
    std::vector<std::uint32_t> work{source};
    forward[source] = true;
    while (!work.empty()) {
        auto v = work.back();
        work.pop_back();
        for (auto w : adjacency_[v])
            if (!forward[w]) {
                forward[w] = true;
                work.push_back(w);
            }
    }
    if (!forward[sink]) {
        approved_ = {rep, target};
        return true;
    }

    std::vector<std::vector<std::uint32_t>> reverse(n);
    for (std::uint32_t v = 0; v < n; ++v)
        for (auto w : adjacency_[v]) reverse[w].push_back(v);
    std::vector<bool> backward(n, false);
    work.push_back(sink);
    backward[sink] = true;
    while (!work.empty()) {
        auto v = work.back();
        work.pop_back();
        for (auto w : reverse[v])
            if (!backward[w]) {
                backward[w] = true;
                work.push_back(w);
            }
    }
    // The new component is the union of the current components of every node
    // on a path source ~> sink.
    for (std::uint32_t v = 0; v < original_count_; ++v)
        if (forward[v] && backward[v] && original_component_[v] != original_component_[source]) return false;
    approved_ = {rep, target};
    return true;
}

bool SccMonitor::preserves_components_by_recomputation(PredicateId rep, PredicateId target) const {
    auto adjacency = adjacency_;
    adjacency[representative_of(rep)].push_back(node_of(target));
    return projection_matches(adjacency);
}

bool SccMonitor::projection_matches_original() const {
    if (dirty_) {
        intact_ = projection_matches(adjacency_);
        dirty_ = false;
    }
    return intact_;
}

bool SccMonitor::projection_matches(const std::vector<std::vector<std::uint32_t>>& adjacency) const {
    auto components = strongly_connected_components(adjacency);
    for (const auto& component : components) {
        std::optional<std::uint32_t> seen;
        for (auto node : component) {
            if (node >= original_count_) continue;
            if (seen && *seen != original_component_[node]) return false;
            seen = original_component_[node];
        }
    }
    // Splitting is impossible: arcs are only ever added.
    return true;
}

}  // namespace magicdl
