#pragma once

// Predicate dependency graphs, SCCs and stratification.

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "magicdl/core.hpp"

namespace magicdl {

// Strongly connected components of a graph over nodes [0, adjacency.size()),
// listed so that every arc points to the same or an earlier component.
std::vector<std::vector<std::uint32_t>> strongly_connected_components(
    const std::vector<std::vector<std::uint32_t>>& adjacency);

struct DependencyArc {
    PredicateId from{};
    PredicateId to{};
    int weight = 0;

    friend auto operator<=>(const DependencyArc&, const DependencyArc&) = default;
};

// Arc head -> body predicate for every rule; weight 1 when the body occurrence
// is a negative literal or an aggregate.
class DependencyGraph {
public:
    DependencyGraph() = default;
    explicit DependencyGraph(const Program& program);

    void add_node(PredicateId p) { nodes_.insert(p); }
    void add_arc(PredicateId from, PredicateId to, int weight);

    const std::set<PredicateId>& nodes() const { return nodes_; }
    const std::set<DependencyArc>& arcs() const { return arcs_; }

    std::string to_dot(const SymbolTable& symbols) const;

private:
    std::set<PredicateId> nodes_;
    std::set<DependencyArc> arcs_;
};

inline DependencyGraph build_dependency_graph(const Program& program) { return DependencyGraph(program); }

struct SccPartition {
    // Dependencies come first; ties broken by smallest contained predicate id.
    std::vector<std::vector<PredicateId>> components;
    std::map<PredicateId, std::size_t> component_of;

    bool same_component(PredicateId a, PredicateId b) const { return component_of.at(a) == component_of.at(b); }
};

SccPartition sccs(const DependencyGraph& graph);

bool is_stratified(const DependencyGraph& graph);

class UnstratifiableError : public std::runtime_error {
public:
    UnstratifiableError(std::vector<PredicateId> cycle, const std::string& description);

    // Closed walk p0 -> p1 -> ... -> p0 whose first arc has weight 1.
    const std::vector<PredicateId>& cycle() const { return cycle_; }

private:
    std::vector<PredicateId> cycle_;
};

// Strata in evaluation order: negation and aggregation only reach strictly
// earlier strata.
std::vector<std::vector<PredicateId>> stratify(const Program& program);

// The graph MS-RS keeps while producing magic rules: the original dependency
// graph plus one representative node m#p per original predicate p and arcs
// p -> m#p. Representative nodes are addressed by their original predicate.
class SccMonitor {
public:
    explicit SccMonitor(const DependencyGraph& original);

    // (m#from, m#to)
    void add_representative_arc(PredicateId from, PredicateId to);

    // Would adding (m#rep, target) leave {C ∩ original | C ∈ SCCs(G)} equal to
    // the original SCCs? Decided from the nodes on paths target ~> m#rep.
    bool preserves_components(PredicateId rep, PredicateId target) const;

    // Same question answered by recomputing all SCCs.
    bool preserves_components_by_recomputation(PredicateId rep, PredicateId target) const;

    // (m#rep, target); callers check preserves_components first.
    void add_binding_arc(PredicateId rep, PredicateId target);

    // Current SCCs of the monitor graph restricted to original predicates.
    bool projection_matches_original() const;

private:
    std::uint32_t node_of(PredicateId p) const { return dense_.at(p); }
    std::uint32_t representative_of(PredicateId p) const {
        return static_cast<std::uint32_t>(original_count_) + dense_.at(p);
    }
    bool projection_matches(const std::vector<std::vector<std::uint32_t>>& adjacency) const;

    std::map<PredicateId, std::uint32_t> dense_;
    std::size_t original_count_ = 0;
    std::vector<std::uint32_t> original_component_;
    std::vector<std::vector<std::uint32_t>> adjacency_;
    mutable bool dirty_ = false;
    mutable bool intact_ = true;
    mutable std::optional<std::pair<PredicateId, PredicateId>> approved_;
};

}  // namespace magicdl
