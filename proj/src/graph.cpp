#include "natlat/graph.hpp"

#include <algorithm>
#include <cmath>
#include <array>
#include <deque>
#include <set>

namespace natlat {

// ---------------------------------------------------------------------------
// Dag

Dag::Dag(const Names& nodes) {
  for (const auto& n : nodes) add_node(n);
}

Dag::Dag(const Names& nodes, const std::vector<Edge>& edges) : Dag(nodes) {
  for (const auto& [p, c] : edges) add_edge(p, c);
}

void Dag::add_node(const std::string& name, const std::string& variable) {
  if (name.empty()) throw InvalidArgument("empty node name");
  if (contains(name)) throw InvalidArgument("duplicate node '" + name + "'");
  const std::string var = variable.empty() ? name : variable;
  if (var != name && contains(var) && is_copy(var)) {
    throw InvalidArgument("node '" + name + "' copies '" + var + "', which is itself a copy");
  }
  names_.push_back(name);
  variables_.push_back(var);
  parents_.emplace_back();
  children_.emplace_back();
}

void Dag::add_edge(const std::string& parent, const std::string& child) {
  const auto p = index_of(parent);
  const auto c = index_of(child);
  if (p == c) throw InvalidArgument("self-loop on '" + parent + "'");
  if (std::find(parents_[c].begin(), parents_[c].end(), p) != parents_[c].end()) {
    throw InvalidArgument("duplicate edge " + parent + " -> " + child);
  }
  if (reaches(c, p)) throw InvalidArgument("edge " + parent + " -> " + child + " creates a cycle");
  parents_[c].insert(std::upper_bound(parents_[c].begin(), parents_[c].end(), p), p);
  children_[p].insert(std::upper_bound(children_[p].begin(), children_[p].end(), c), c);
}

bool Dag::contains(const std::string& name) const {
  return std::find(names_.begin(), names_.end(), name) != names_.end();
}

std::size_t Dag::index_of(const std::string& name) const {
  const auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) throw UnknownVariable(name);
  return static_cast<std::size_t>(it - names_.begin());
}

bool Dag::has_copies() const {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i] != variables_[i]) return true;
  }
  return false;
}

Names Dag::variables() const {
  Names out;
  for (const auto& v : variables_) {
    if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
  }
  return out;
}

Names Dag::parents_of(const std::string& node) const {
  Names out;
  for (auto p : parents_[index_of(node)]) out.push_back(names_[p]);
  return out;
}

std::vector<Edge> Dag::edges() const {
  std::vector<Edge> out;
  for (std::size_t c = 0; c < names_.size(); ++c) {
    for (auto p : parents_[c]) out.emplace_back(names_[p], names_[c]);
  }
  return out;
}

bool Dag::has_edge(const std::string& parent, const std::string& child) const {
  if (!contains(parent) || !contains(child)) return false;
  const auto& ps = parents_[index_of(child)];
  return std::find(ps.begin(), ps.end(), index_of(parent)) != ps.end();
}

bool Dag::same_nodes(const Dag& other) const {
  if (size() != other.size()) return false;
  for (std::size_t i = 0; i < size(); ++i) {
    if (!other.contains(names_[i]) || other.variable_of(names_[i]) != variables_[i]) return false;
  }
  return true;
}

std::vector<bool> Dag::descendants(std::size_t i) const {
  std::vector<bool> seen(size(), false);
  std::vector<std::size_t> stack(children_[i].begin(), children_[i].end());
  while (!stack.empty()) {
    const auto v = stack.back();
    stack.pop_back();
    if (seen[v]) continue;
    seen[v] = true;
    stack.insert(stack.end(), children_[v].begin(), children_[v].end());
  }
  return seen;
}

std::vector<bool> Dag::ancestors(const std::vector<std::size_t>& of) const {
  std::vector<bool> seen(size(), false);
  std::vector<std::size_t> stack(of);
  while (!stack.empty()) {
    const auto v = stack.back();
    stack.pop_back();
    if (seen[v]) continue;
    seen[v] = true;
    stack.insert(stack.end(), parents_[v].begin(), parents_[v].end());
  }
  return seen;
}

bool Dag::reaches(std::size_t from, std::size_t to) const {
  return from == to || descendants(from)[to];
}

bool operator==(const Dag& a, const Dag& b) {
  if (!a.same_nodes(b)) return false;
  auto ea = a.edges();
  auto eb = b.edges();
  std::sort(ea.begin(), ea.end());
  std::sort(eb.begin(), eb.end());
  return ea == eb;
}

// ---------------------------------------------------------------------------
// Text format

Dag parse_dag(std::string_view text) {
  const auto lines = tokenize_lines(text);
  return parse_dag(lines);
}

Dag parse_dag(std::span<const TextLine> lines) {
  Names nodes;
  std::vector<std::pair<std::string, std::string>> copies;
  std::vector<std::pair<Edge, int>> edges;
  std::vector<int> copy_lines;
  for (const auto& line : lines) {
    const auto& t = line.tokens;
    if (t[0] == "nodes") {
      if (t.size() < 2) throw ParseError(line.number, "'nodes' needs at least one name");
      for (std::size_t i = 1; i < t.size(); ++i) {
        if (std::find(nodes.begin(), nodes.end(), t[i]) != nodes.end()) {
          throw ParseError(line.number, "duplicate node '" + t[i] + "'");
        }
        nodes.push_back(t[i]);
      }
    } else if (t[0] == "copy") {
      if (t.size() != 3) throw ParseError(line.number, "expected 'copy <node> <variable>'");
      copies.emplace_back(t[1], t[2]);
      copy_lines.push_back(line.number);
    } else if (t[0] == "edge") {
      if (t.size() != 3) throw ParseError(line.number, "expected 'edge <parent> <child>'");
      edges.push_back({{t[1], t[2]}, line.number});
    } else {
      throw ParseError(line.number, "unknown directive '" + t[0] + "'");
    }
  }
  Dag g;
  for (const auto& n : nodes) {
    std::string var;
    for (std::size_t c = 0; c < copies.size(); ++c) {
      if (copies[c].first == n) {
        if (!var.empty()) throw ParseError(copy_lines[c], "node '" + n + "' declared as a copy twice");
        var = copies[c].second;
      }
    }
    try {
      g.add_node(n, var);
    } catch (const Error& e) {
      throw ParseError(lines.empty() ? 0 : lines.front().number, e.what());
    }
  }
  for (std::size_t c = 0; c < copies.size(); ++c) {
    if (!g.contains(copies[c].first)) {
      throw ParseError(copy_lines[c], "copy of undeclared node '" + copies[c].first + "'");
    }
    if (copies[c].first == copies[c].second) throw ParseError(copy_lines[c], "node cannot copy itself");
  }
  for (const auto& [e, number] : edges) {
    try {
      g.add_edge(e.first, e.second);
    } catch (const Error& err) {
      throw ParseError(number, err.what());
    }
  }
  return g;
}

std::string format_dag(const Dag& g) {
  std::string out = "nodes";
  for (const auto& n : g.nodes()) out += " " + n;
  out += '\n';
  for (const auto& n : g.nodes()) {
    if (g.is_copy(n)) out += "copy " + n + " " + g.variable_of(n) + "\n";
  }
  for (const auto& [p, c] : g.edges()) out += "edge " + p + " " + c + "\n";
  return out;
}

Dag complete_dag(const Names& order) {
  Dag g(order);
  for (std::size_t i = 0; i < order.size(); ++i) {
    for (std::size_t j = i + 1; j < order.size(); ++j) g.add_edge(order[i], order[j]);
  }
  return g;
}

Dag star_dag(const Names& roots, const Names& leaves) {
  Dag g = complete_dag(roots);
  for (const auto& leaf : leaves) {
    g.add_node(leaf);
    for (const auto& r : roots) g.add_edge(r, leaf);
  }
  return g;
}

// ---------------------------------------------------------------------------
// Factorization

namespace {

// Conditional factor P[x_k | x_pa(k)] for one variable of P.
struct Factor {
  std::size_t card;
  SubIndex family_index;
  SubIndex parent_index;
  JointDistribution family;
  JointDistribution parents;
};

std::vector<Factor> factors_for(const JointDistribution& p, const Dag& g) {
  if (g.has_copies()) throw InvalidArgument("diagram has copy nodes; use diagram_error");
  if (g.size() != p.arity()) {
    throw InvalidArgument("diagram has " + std::to_string(g.size()) + " nodes but the distribution has " +
                          std::to_string(p.arity()) + " variables");
  }
  std::vector<Factor> out;
  for (std::size_t k = 0; k < p.arity(); ++k) {
    const auto& name = p.variable(k).name;
    if (!g.contains(name)) throw InvalidArgument("variable '" + name + "' is not a node of the diagram");
    std::vector<std::size_t> pa;
    Names pa_names;
    for (auto i : g.parents(g.index_of(name))) {
      pa.push_back(p.index_of(g.nodes()[i]));
      pa_names.push_back(g.nodes()[i]);
    }
    std::sort(pa.begin(), pa.end());
    auto fam = pa;
    fam.insert(std::upper_bound(fam.begin(), fam.end(), k), k);
    Names fam_names = pa_names;
    fam_names.push_back(name);
    out.push_back(Factor{p.variable(k).cardinality, SubIndex(p, fam), SubIndex(p, pa),
                         marginalize(p, fam_names), marginalize(p, pa_names)});
  }
  return out;
}

}  // namespace

JointDistribution factorization_projection(const JointDistribution& p, const Dag& g) {
  const auto factors = factors_for(p, g);
  if (p.cell_count() > kDenseCellLimit) {
    throw InvalidArgument("projection of a sparse table is not materialized; use factorization_error");
  }
  std::vector<VarSpec> vars(p.variables().begin(), p.variables().end());
  CellAccumulator acc(vars);
  Assignment digits(vars.size(), 0);
  for (std::uint64_t i = 0; i < p.cell_count(); ++i) {
    double q = 1.0;
    for (const auto& f : factors) {
      const double denom = f.parents.prob_at(f.parent_index(digits));
      q *= denom > 0.0 ? f.family.prob_at(f.family_index(digits)) / denom : 1.0 / static_cast<double>(f.card);
      if (q == 0.0) break;
    }
    acc.add(i, q);
    for (std::size_t k = digits.size(); k-- > 0;) {
      if (++digits[k] < vars[k].cardinality) break;
      digits[k] = 0;
    }
  }
  auto q = std::move(acc).finish();
  const double mass = q.total_mass();
  if (std::abs(mass - 1.0) > 1e-9 * static_cast<double>(std::max<std::size_t>(1, p.arity()))) {
    throw InvalidDistribution("projection mass " + std::to_string(mass) + " is not 1");
  }
  return q.normalized();
}

FactorizationError factorization_error(const JointDistribution& p, const Dag& g) {
  const auto factors = factors_for(p, g);
  double d = 0.0;
  bool infinite = false;
  p.for_each_nonzero([&](std::span<const std::size_t> digits, double v) {
    double log_q = 0.0;
    for (const auto& f : factors) {
      const double num = f.family.prob_at(f.family_index(digits));
      const double den = f.parents.prob_at(f.parent_index(digits));
      if (num <= 0.0 || den <= 0.0) {
        infinite = true;
        return;
      }
      log_q += std::log2(num) - std::log2(den);
    }
    d += v * (std::log2(v) - log_q);
  });
  return {infinite ? kInfiniteBits : std::max(d, 0.0), g};
}

JointDistribution materialize_diagram(const JointDistribution& p, const Dag& g) {
  const Names vars = g.variables();
  auto m = marginalize(p, vars);
  for (const auto& node : g.nodes()) {
    if (!g.is_copy(node)) continue;
    const auto src = m.index_of(g.variable_of(node));
    m = extend_with_function(m, {node, m.variable(src).cardinality},
                             [src](std::span<const std::size_t> d) { return d[src]; });
  }
  Names keep;
  for (const auto& v : m.names()) {
    if (g.contains(v)) keep.push_back(v);
  }
  return keep.size() == m.arity() ? m : marginalize(m, keep);
}

double diagram_error(const JointDistribution& p, const Dag& g) {
  if (!g.has_copies() && g.size() == p.arity()) return factorization_error(p, g).epsilon_bits;
  const auto m = materialize_diagram(p, g);
  Dag plain(m.names());
  for (const auto& [a, b] : g.edges()) plain.add_edge(a, b);
  return factorization_error(m, plain).epsilon_bits;
}

// ---------------------------------------------------------------------------
// d-separation

namespace {

struct Query {
  std::vector<bool> a, b, c;
};

Query make_query(const Dag& g, const Names& a, const Names& b, const Names& c) {
  Query q{std::vector<bool>(g.size()), std::vector<bool>(g.size()), std::vector<bool>(g.size())};
  auto mark = [&](const Names& names, std::vector<bool>& set) {
    for (const auto& n : names) {
      const auto i = g.index_of(n);
      if (q.a[i] || q.b[i] || q.c[i]) throw InvalidArgument("node '" + n + "' appears in two query sets");
      set[i] = true;
    }
  };
  mark(a, q.a);
  mark(b, q.b);
  mark(c, q.c);
  return q;
}

std::vector<std::size_t> members(const std::vector<bool>& set) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < set.size(); ++i) {
    if (set[i]) out.push_back(i);
  }
  return out;
}

}  // namespace

bool d_separated(const Dag& g, const Names& a, const Names& b, const Names& c) {
  const auto q = make_query(g, a, b, c);
  const auto c_anc = g.ancestors(members(q.c));
  // Bayes-ball: a trail may arrive at a node from a child (up) or from a parent (down).
  enum Dir { kUp = 0, kDown = 1 };
  std::vector<std::array<bool, 2>> visited(g.size(), {false, false});
  std::deque<std::pair<std::size_t, Dir>> queue;
  for (auto i : members(q.a)) queue.emplace_back(i, kUp);
  while (!queue.empty()) {
    const auto [y, dir] = queue.front();
    queue.pop_front();
    if (visited[y][dir]) continue;
    visited[y][dir] = true;
    if (!q.c[y] && q.b[y]) return false;
    if (dir == kUp && !q.c[y]) {
      for (auto z : g.parents(y)) queue.emplace_back(z, kUp);
      for (auto z : g.children(y)) queue.emplace_back(z, kDown);
    } else if (dir == kDown) {
      if (!q.c[y]) {
        for (auto z : g.children(y)) queue.emplace_back(z, kDown);
      }
      if (c_anc[y]) {
        for (auto z : g.parents(y)) queue.emplace_back(z, kUp);
      }
    }
  }
  return true;
}

bool d_separated_moral(const Dag& g, const Names& a, const Names& b, const Names& c) {
  const auto q = make_query(g, a, b, c);
  std::vector<std::size_t> roots;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (q.a[i] || q.b[i] || q.c[i]) roots.push_back(i);
  }
  const auto anc = g.ancestors(roots);
  std::vector<std::set<std::size_t>> adj(g.size());
  for (std::size_t v = 0; v < g.size(); ++v) {
    if (!anc[v]) continue;
    const auto& ps = g.parents(v);
    for (auto p : ps) {
      adj[v].insert(p);
      adj[p].insert(v);
    }
    for (std::size_t i = 0; i < ps.size(); ++i) {
      for (std::size_t j = i + 1; j < ps.size(); ++j) {
        adj[ps[i]].insert(ps[j]);
        adj[ps[j]].insert(ps[i]);
      }
    }
  }
  std::vector<bool> seen(g.size(), false);
  std::vector<std::size_t> stack = members(q.a);
  while (!stack.empty()) {
    const auto v = stack.back();
    stack.pop_back();
    if (seen[v] || q.c[v]) continue;
    seen[v] = true;
    if (q.b[v]) return false;
    stack.insert(stack.end(), adj[v].begin(), adj[v].end());
  }
  return true;
}

std::string IndependenceStatement::to_string() const {
  auto join = [](const Names& ns) {
    std::string s = "{";
    for (std::size_t i = 0; i < ns.size(); ++i) s += (i ? ", " : "") + ns[i];
    return s + "}";
  };
  return node + " _||_ " + join(independent_of) + " | " + join(given);
}

std::vector<IndependenceStatement> local_markov_statements(const Dag& g) {
  std::vector<IndependenceStatement> out;
  for (std::size_t v = 0; v < g.size(); ++v) {
    const auto desc = g.descendants(v);
    const auto& pa = g.parents(v);
    IndependenceStatement s{g.nodes()[v], {}, {}};
    for (auto p : pa) s.given.push_back(g.nodes()[p]);
    for (std::size_t u = 0; u < g.size(); ++u) {
      if (u == v || desc[u] || std::find(pa.begin(), pa.end(), u) != pa.end()) continue;
      s.independent_of.push_back(g.nodes()[u]);
    }
    if (!s.independent_of.empty()) out.push_back(std::move(s));
  }
  return out;
}

std::optional<IndependenceStatement> unimplied_statement(const Dag& g1, const Dag& g2) {
  if (!g1.same_nodes(g2)) throw InvalidArgument("diagrams are over different node sets");
  for (auto& s : local_markov_statements(g2)) {
    if (!d_separated(g1, {s.node}, s.independent_of, s.given)) return s;
  }
  return std::nullopt;
}

bool graph_implies(const Dag& g1, const Dag& g2) { return !unimplied_statement(g1, g2).has_value(); }

// ---------------------------------------------------------------------------
// Topological orders

namespace {

void require_common_nodes(std::span<const Dag> graphs) {
  for (std::size_t i = 1; i < graphs.size(); ++i) {
    if (!graphs[0].same_nodes(graphs[i])) throw InvalidArgument("diagrams are over different node sets");
  }
}

// Kahn's algorithm over the union of edges; returns the emitted order (short if cyclic).
Names kahn(std::span<const Dag> graphs, std::set<std::string>& remaining) {
  const Dag& base = graphs[0];
  std::vector<std::set<std::string>> preds(base.size());
  for (const auto& g : graphs) {
    for (const auto& [p, c] : g.edges()) preds[base.index_of(c)].insert(p);
  }
  remaining = std::set<std::string>(base.nodes().begin(), base.nodes().end());
  std::set<std::string> ready;
  for (std::size_t i = 0; i < base.size(); ++i) {
    if (preds[i].empty()) ready.insert(base.nodes()[i]);
  }
  Names order;
  while (!ready.empty()) {
    const std::string n = *ready.begin();
    ready.erase(ready.begin());
    remaining.erase(n);
    order.push_back(n);
    for (std::size_t i = 0; i < base.size(); ++i) {
      if (preds[i].erase(n) && preds[i].empty() && remaining.count(base.nodes()[i])) {
        ready.insert(base.nodes()[i]);
      }
    }
  }
  return order;
}

}  // namespace

std::optional<Names> common_topological_order(std::span<const Dag> graphs) {
  if (graphs.empty()) return Names{};
  require_common_nodes(graphs);
  std::set<std::string> remaining;
  auto order = kahn(graphs, remaining);
  if (!remaining.empty()) return std::nullopt;
  return order;
}

std::optional<Names> topological_order(const Dag& g) { return common_topological_order(std::span(&g, 1)); }

std::optional<std::pair<std::string, std::string>> order_conflict(std::span<const Dag> graphs) {
  if (graphs.empty()) return std::nullopt;
  require_common_nodes(graphs);
  std::set<std::string> remaining;
  kahn(graphs, remaining);
  if (remaining.empty()) return std::nullopt;
  // Every remaining node has a predecessor among the remaining ones; walk back to a cycle.
  auto pred_of = [&](const std::string& n) -> std::string {
    for (const auto& g : graphs) {
      for (const auto& p : g.parents_of(n)) {
        if (remaining.count(p)) return p;
      }
    }
    return {};
  };
  std::vector<std::string> path{*remaining.begin()};
  while (true) {
    const auto p = pred_of(path.back());
    const auto it = std::find(path.begin(), path.end(), p);
    if (it != path.end()) {
      // path.back() <- p closes the cycle; report the edge p -> path.back().
      return std::make_pair(p, path.back());
    }
    path.push_back(p);
  }
}

}  // namespace natlat
