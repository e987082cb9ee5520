#pragma once

// Bayes-net diagrams over named variables: factorization projection and
// error, d-separation, implication between diagrams, and shared
// topological orders.
//
// A diagram node normally denotes the variable of the same name. A node may
// instead be a *copy* of another variable (written `copy <node> <variable>`
// in the text format); numerically it is an exact duplicate of that
// variable. Copies let a diagram say "Y <- X -> Y" without name clashes.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "natlat/distribution.hpp"
#include "natlat/text.hpp"

namespace natlat {

using Edge = std::pair<std::string, std::string>;  // (parent, child)

class Dag {
 public:
  Dag() = default;
  explicit Dag(const Names& nodes);
  Dag(const Names& nodes, const std::vector<Edge>& edges);

  /// Adds a node denoting `variable` (itself if empty).
  void add_node(const std::string& name, const std::string& variable = {});
  /// Throws InvalidArgument on unknown nodes, self-loops, duplicates and cycles.
  void add_edge(const std::string& parent, const std::string& child);

  std::size_t size() const { return names_.size(); }
  const Names& nodes() const { return names_; }
  bool contains(const std::string& name) const;
  std::size_t index_of(const std::string& name) const;

  /// Variable the node stands for.
  const std::string& variable_of(const std::string& node) const { return variables_[index_of(node)]; }
  const std::string& variable_at(std::size_t i) const { return variables_[i]; }
  bool is_copy(const std::string& node) const { return variable_of(node) != node; }
  bool has_copies() const;
  /// Distinct variables denoted by the nodes, in node order.
  Names variables() const;

  const std::vector<std::size_t>& parents(std::size_t i) const { return parents_[i]; }
  const std::vector<std::size_t>& children(std::size_t i) const { return children_[i]; }
  Names parents_of(const std::string& node) const;
  std::vector<Edge> edges() const;
  bool has_edge(const std::string& parent, const std::string& child) const;

  /// Node set including what each node denotes; order-insensitive.
  bool same_nodes(const Dag& other) const;

  /// Descendants of node i, excluding i.
  std::vector<bool> descendants(std::size_t i) const;
  /// Ancestors of the given nodes, including them.
  std::vector<bool> ancestors(const std::vector<std::size_t>& of) const;

  friend bool operator==(const Dag& a, const Dag& b);

 private:
  bool reaches(std::size_t from, std::size_t to) const;

  Names names_;
  Names variables_;
  std::vector<std::vector<std::size_t>> parents_;
  std::vector<std::vector<std::size_t>> children_;
};

Dag parse_dag(std::string_view text);
/// Parses `nodes`, `copy` and `edge` lines; anything else is an error.
Dag parse_dag(std::span<const TextLine> lines);
std::string format_dag(const Dag& g);

/// Every node in `order` points at all later ones.
Dag complete_dag(const Names& order);
/// Each root points at every leaf; roots form a complete DAG among themselves.
Dag star_dag(const Names& roots, const Names& leaves);

struct FactorizationError {
  double epsilon_bits = 0.0;  // >= 0, may be kInfiniteBits
  Dag graph;
};

/// Q[x] = prod_i P[x_i | x_pa(i)], over P's variable order. Conditionals at
/// zero-probability parent configurations are uniform. G's nodes must be
/// exactly P's variables (no copies).
JointDistribution factorization_projection(const JointDistribution& p, const Dag& g);

/// D_KL(P || factorization_projection(P, G)), evaluated over P's support
/// without materializing the projection.
FactorizationError factorization_error(const JointDistribution& p, const Dag& g);

/// Factorization error of a diagram over any subset of P's variables, where
/// copy nodes are materialized as exact duplicates of their variable.
double diagram_error(const JointDistribution& p, const Dag& g);

/// P restricted to the diagram's variables with one extra column per copy
/// node, so that the result's variables are exactly g's nodes.
JointDistribution materialize_diagram(const JointDistribution& p, const Dag& g);

/// d-separation of A and B given C (Bayes-ball reachability).
bool d_separated(const Dag& g, const Names& a, const Names& b, const Names& c);
/// Same verdict via moralization of the ancestral graph.
bool d_separated_moral(const Dag& g, const Names& a, const Names& b, const Names& c);

struct IndependenceStatement {
  std::string node;
  Names independent_of;
  Names given;

  std::string to_string() const;
};

/// Local Markov statements (node _||_ non-descendants | parents) of g, skipping trivial ones.
std::vector<IndependenceStatement> local_markov_statements(const Dag& g);

/// First local Markov statement of g2 that is not d-separated in g1, if any.
std::optional<IndependenceStatement> unimplied_statement(const Dag& g1, const Dag& g2);

/// True iff every distribution that factors over g1 also factors over g2.
bool graph_implies(const Dag& g1, const Dag& g2);

/// Lexicographically smallest (by name) order consistent with every graph,
/// or nullopt when the union of edges has a cycle.
std::optional<Names> common_topological_order(std::span<const Dag> graphs);
std::optional<Names> topological_order(const Dag& g);

/// Two nodes on a cycle of the union of the graphs' edges, if one exists.
std::optional<std::pair<std::string, std::string>> order_conflict(std::span<const Dag> graphs);

}  // namespace natlat
