#include "natlat/random.hpp"

#include <algorithm>

namespace natlat {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

Rng stream_rng(std::uint64_t seed, std::uint64_t stream) { return Rng(mix_seed(seed, stream)); }

std::size_t uniform_index(Rng& rng, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

double uniform_real(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

Eigen::ArrayXd dirichlet(Rng& rng, Eigen::Index k, double alpha) {
  std::gamma_distribution<double> gamma(alpha, 1.0);
  Eigen::ArrayXd x(k);
  for (Eigen::Index i = 0; i < k; ++i) x[i] = gamma(rng);
  const double s = x.sum();
  if (!(s > 0.0)) {
    // Every draw underflowed (tiny alpha): fall back to a random vertex.
    x.setZero();
    x[static_cast<Eigen::Index>(uniform_index(rng, static_cast<std::size_t>(k)))] = 1.0;
    return x;
  }
  return x / s;
}

JointDistribution random_joint(Rng& rng, std::vector<VarSpec> vars, double alpha) {
  std::uint64_t cells = 1;
  for (const auto& v : vars) cells *= v.cardinality;
  return JointDistribution::from_dense(std::move(vars), dirichlet(rng, static_cast<Eigen::Index>(cells), alpha));
}

JointDistribution random_bayes_net(Rng& rng, const std::vector<VarSpec>& vars, const Dag& g, double alpha) {
  const auto order = topological_order(g);
  if (!order) throw InvalidArgument("diagram is cyclic");
  auto card_of = [&](const std::string& name) {
    for (const auto& v : vars) {
      if (v.name == name) return v.cardinality;
    }
    throw UnknownVariable(name);
  };
  // Conditional tables: cpt[node][parent configuration] is a distribution over the node.
  std::vector<std::vector<Eigen::ArrayXd>> cpt(g.size());
  for (const auto& name : *order) {
    const auto i = g.index_of(name);
    std::size_t configs = 1;
    for (auto p : g.parents(i)) configs *= card_of(g.nodes()[p]);
    for (std::size_t c = 0; c < configs; ++c) {
      cpt[i].push_back(dirichlet(rng, static_cast<Eigen::Index>(card_of(name)), alpha));
    }
  }
  std::vector<std::size_t> pos(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    pos[i] = static_cast<std::size_t>(
        std::find_if(vars.begin(), vars.end(), [&](const VarSpec& v) { return v.name == g.nodes()[i]; }) -
        vars.begin());
    if (pos[i] == vars.size()) throw UnknownVariable(g.nodes()[i]);
  }
  if (g.size() != vars.size()) throw InvalidArgument("diagram and variable list differ");
  return JointDistribution::tabulate(vars, [&](const Assignment& a) {
    double p = 1.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      std::size_t config = 0;
      for (auto par : g.parents(i)) config = config * card_of(g.nodes()[par]) + a[pos[par]];
      p *= cpt[i][config][static_cast<Eigen::Index>(a[pos[i]])];
    }
    return p;
  });
}

Dag random_dag(Rng& rng, const Names& order, double edge_prob) {
  Dag g(order);
  std::bernoulli_distribution coin(edge_prob);
  for (std::size_t i = 0; i < order.size(); ++i) {
    for (std::size_t j = i + 1; j < order.size(); ++j) {
      if (coin(rng)) g.add_edge(order[i], order[j]);
    }
  }
  return g;
}

JointDistribution mix(const JointDistribution& a, const JointDistribution& b, double lambda) {
  if (!std::equal(a.variables().begin(), a.variables().end(), b.variables().begin(), b.variables().end())) {
    throw InvalidArgument("cannot mix distributions over different variables");
  }
  std::vector<VarSpec> vars(a.variables().begin(), a.variables().end());
  return JointDistribution::from_dense(std::move(vars), lambda * a.dense() + (1.0 - lambda) * b.dense());
}

}  // namespace natlat
