#include "natlat/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "natlat/numeric.hpp"

namespace natlat {

namespace {

std::vector<std::uint64_t> row_major_strides(const std::vector<VarSpec>& vars, std::uint64_t& cells) {
  std::set<std::string> seen;
  for (const auto& v : vars) {
    if (v.name.empty()) throw InvalidDistribution("variable with empty name");
    if (v.cardinality == 0) throw InvalidDistribution("variable '" + v.name + "' has cardinality 0");
    if (!seen.insert(v.name).second) throw InvalidDistribution("duplicate variable '" + v.name + "'");
  }
  std::vector<std::uint64_t> strides(vars.size(), 1);
  cells = 1;
  for (std::size_t k = vars.size(); k-- > 0;) {
    strides[k] = cells;
    if (cells > std::numeric_limits<std::uint64_t>::max() / vars[k].cardinality) {
      throw InvalidDistribution("joint alphabet too large to index");
    }
    cells *= vars[k].cardinality;
  }
  return strides;
}

void check_cell(double v) {
  if (!std::isfinite(v) || v < 0.0) {
    throw InvalidDistribution("probabilities must be finite and non-negative");
  }
}

std::vector<std::size_t> positions_of(const JointDistribution& p, const Names& names) {
  std::vector<std::size_t> pos;
  pos.reserve(names.size());
  for (const auto& n : names) pos.push_back(p.index_of(n));
  return pos;
}

// Positions in P's own order, deduplicated.
std::vector<std::size_t> sorted_positions(const JointDistribution& p, const Names& names) {
  auto pos = positions_of(p, names);
  std::sort(pos.begin(), pos.end());
  pos.erase(std::unique(pos.begin(), pos.end()), pos.end());
  return pos;
}

void require_same_variables(const JointDistribution& p, const JointDistribution& q) {
  if (!std::equal(p.variables().begin(), p.variables().end(), q.variables().begin(),
                  q.variables().end())) {
    throw InvalidArgument("distributions are over different variable lists");
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// JointDistribution

JointDistribution::JointDistribution(std::vector<VarSpec> variables, Storage storage)
    : variables_(std::move(variables)), storage_(std::move(storage)) {
  strides_ = row_major_strides(variables_, cell_count_);
  if (const auto* dense = std::get_if<Eigen::ArrayXd>(&storage_)) {
    if (static_cast<std::uint64_t>(dense->size()) != cell_count_) {
      throw InvalidDistribution("table has " + std::to_string(dense->size()) + " cells, expected " +
                                std::to_string(cell_count_));
    }
    if (!dense->allFinite() || (*dense < 0.0).any()) check_cell(-1.0);
  } else {
    for (const auto& [index, v] : std::get<SparseCells>(storage_)) {
      check_cell(v);
      if (index >= cell_count_) throw InvalidDistribution("cell index out of range");
    }
  }
}

JointDistribution JointDistribution::load(std::vector<VarSpec> variables, Storage storage) {
  JointDistribution p(std::move(variables), std::move(storage));
  const double mass = p.total_mass();
  if (std::abs(mass - 1.0) > kLoadMassTolerance) {
    throw InvalidDistribution("total probability mass " + std::to_string(mass) + " is not 1");
  }
  return mass == 1.0 ? p : p.normalized();
}

JointDistribution JointDistribution::from_dense(std::vector<VarSpec> variables, Eigen::ArrayXd probabilities) {
  std::uint64_t cells = 0;
  row_major_strides(variables, cells);
  if (cells <= kDenseCellLimit) return load(std::move(variables), std::move(probabilities));
  SparseCells sparse;
  for (Eigen::Index i = 0; i < probabilities.size(); ++i) {
    check_cell(probabilities[i]);
    if (probabilities[i] > 0.0) sparse.emplace_back(static_cast<std::uint64_t>(i), probabilities[i]);
  }
  return load(std::move(variables), std::move(sparse));
}

JointDistribution JointDistribution::from_cells(std::vector<VarSpec> variables,
                                                const std::vector<std::pair<Assignment, double>>& cells) {
  JointDistribution shape(variables, SparseCells{});
  std::vector<std::pair<std::uint64_t, double>> entries;
  entries.reserve(cells.size());
  for (const auto& [a, v] : cells) {
    check_cell(v);
    entries.emplace_back(shape.encode(a), v);
  }
  std::sort(entries.begin(), entries.end());
  for (std::size_t i = 1; i < entries.size(); ++i) {
    if (entries[i].first == entries[i - 1].first) {
      throw InvalidDistribution("cell listed twice");
    }
  }
  if (shape.cell_count() <= kDenseCellLimit) {
    Eigen::ArrayXd dense = Eigen::ArrayXd::Zero(static_cast<Eigen::Index>(shape.cell_count()));
    for (const auto& [i, v] : entries) dense[static_cast<Eigen::Index>(i)] = v;
    return load(std::move(variables), std::move(dense));
  }
  std::erase_if(entries, [](const auto& e) { return e.second == 0.0; });
  return load(std::move(variables), std::move(entries));
}

JointDistribution JointDistribution::uniform(std::vector<VarSpec> variables) {
  std::uint64_t cells = 0;
  row_major_strides(variables, cells);
  if (cells > kDenseCellLimit) throw InvalidDistribution("uniform table too large for dense storage");
  const auto n = static_cast<Eigen::Index>(cells);
  return JointDistribution(std::move(variables), Eigen::ArrayXd::Constant(n, 1.0 / static_cast<double>(n)));
}

JointDistribution JointDistribution::point_mass(std::vector<VarSpec> variables, const Assignment& at) {
  return from_cells(std::move(variables), {{at, 1.0}});
}

JointDistribution JointDistribution::tabulate(std::vector<VarSpec> variables,
                                              const std::function<double(const Assignment&)>& mass) {
  JointDistribution shape(variables, SparseCells{});
  if (shape.cell_count() > kDenseCellLimit) throw InvalidDistribution("tabulated table too large");
  Eigen::ArrayXd dense(static_cast<Eigen::Index>(shape.cell_count()));
  for (std::uint64_t i = 0; i < shape.cell_count(); ++i) {
    dense[static_cast<Eigen::Index>(i)] = mass(shape.decode(i));
  }
  return load(std::move(variables), std::move(dense));
}

Names JointDistribution::names() const {
  Names out;
  out.reserve(variables_.size());
  for (const auto& v : variables_) out.push_back(v.name);
  return out;
}

bool JointDistribution::contains(const std::string& name) const {
  return std::any_of(variables_.begin(), variables_.end(), [&](const VarSpec& v) { return v.name == name; });
}

std::size_t JointDistribution::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < variables_.size(); ++i) {
    if (variables_[i].name == name) return i;
  }
  throw UnknownVariable(name);
}

const Eigen::ArrayXd& JointDistribution::dense() const {
  if (const auto* d = std::get_if<Eigen::ArrayXd>(&storage_)) return *d;
  throw InvalidArgument("distribution uses sparse storage");
}

std::uint64_t JointDistribution::encode(const Assignment& a) const {
  if (a.size() != variables_.size()) {
    throw InvalidArgument("assignment has " + std::to_string(a.size()) + " values, expected " +
                          std::to_string(variables_.size()));
  }
  std::uint64_t idx = 0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (a[k] >= variables_[k].cardinality) {
      throw InvalidArgument("value " + std::to_string(a[k]) + " out of range for '" + variables_[k].name + "'");
    }
    idx += a[k] * strides_[k];
  }
  return idx;
}

Assignment JointDistribution::decode(std::uint64_t index) const {
  Assignment a(variables_.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    a[k] = static_cast<std::size_t>(index / strides_[k]);
    index %= strides_[k];
  }
  return a;
}

double JointDistribution::prob_at(std::uint64_t index) const {
  if (const auto* d = std::get_if<Eigen::ArrayXd>(&storage_)) return (*d)[static_cast<Eigen::Index>(index)];
  const auto& cells = std::get<SparseCells>(storage_);
  auto it = std::lower_bound(cells.begin(), cells.end(), index,
                             [](const auto& cell, std::uint64_t i) { return cell.first < i; });
  return (it != cells.end() && it->first == index) ? it->second : 0.0;
}

double JointDistribution::total_mass() const {
  if (const auto* d = std::get_if<Eigen::ArrayXd>(&storage_)) return d->sum();
  double s = 0.0;
  for (const auto& cell : std::get<SparseCells>(storage_)) s += cell.second;
  return s;
}

std::size_t JointDistribution::support_size() const {
  if (const auto* d = std::get_if<Eigen::ArrayXd>(&storage_)) return static_cast<std::size_t>((*d > 0.0).count());
  return std::get<SparseCells>(storage_).size();
}

JointDistribution JointDistribution::normalized() const {
  const double mass = total_mass();
  if (!(mass > 0.0)) throw InvalidDistribution("cannot normalize a distribution with zero mass");
  if (const auto* d = std::get_if<Eigen::ArrayXd>(&storage_)) {
    return JointDistribution(variables_, Eigen::ArrayXd(*d / mass));
  }
  SparseCells cells = std::get<SparseCells>(storage_);
  for (auto& cell : cells) cell.second /= mass;
  return JointDistribution(variables_, std::move(cells));
}

// ---------------------------------------------------------------------------
// CellAccumulator / SubIndex

CellAccumulator::CellAccumulator(std::vector<VarSpec> variables) : variables_(std::move(variables)) {
  row_major_strides(variables_, cell_count_);
  if (cell_count_ <= kDenseCellLimit) dense_ = Eigen::ArrayXd::Zero(static_cast<Eigen::Index>(cell_count_));
}

void CellAccumulator::add(std::uint64_t index, double p) {
  if (cell_count_ <= kDenseCellLimit) {
    dense_[static_cast<Eigen::Index>(index)] += p;
  } else if (p != 0.0) {
    sparse_.emplace_back(index, p);
  }
}

JointDistribution CellAccumulator::finish() && {
  if (cell_count_ <= kDenseCellLimit) return JointDistribution(std::move(variables_), std::move(dense_));
  std::stable_sort(sparse_.begin(), sparse_.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  JointDistribution::SparseCells merged;
  for (const auto& [i, v] : sparse_) {
    if (!merged.empty() && merged.back().first == i) {
      merged.back().second += v;
    } else {
      merged.emplace_back(i, v);
    }
  }
  std::erase_if(merged, [](const auto& e) { return e.second <= 0.0; });
  return JointDistribution(std::move(variables_), std::move(merged));
}

SubIndex::SubIndex(const JointDistribution& over, const std::vector<std::size_t>& positions)
    : positions_(positions), strides_(positions.size(), 1) {
  std::uint64_t s = 1;
  for (std::size_t k = positions_.size(); k-- > 0;) {
    strides_[k] = s;
    s *= over.variable(positions_[k]).cardinality;
  }
}

// ---------------------------------------------------------------------------
// Operations

JointDistribution marginalize(const JointDistribution& p, const Names& keep) {
  const auto pos = sorted_positions(p, keep);
  std::vector<VarSpec> vars;
  for (auto k : pos) vars.push_back(p.variable(k));
  CellAccumulator acc(std::move(vars));
  const SubIndex sub(p, pos);
  p.for_each_nonzero([&](std::span<const std::size_t> d, double v) { acc.add(sub(d), v); });
  return std::move(acc).finish();
}

JointDistribution condition(const JointDistribution& p,
                            const std::vector<std::pair<std::string, std::size_t>>& evidence) {
  std::vector<std::size_t> ev_pos;
  std::vector<std::size_t> ev_val;
  for (const auto& [name, value] : evidence) {
    const auto k = p.index_of(name);
    if (value >= p.variable(k).cardinality) {
      throw InvalidArgument("evidence value " + std::to_string(value) + " out of range for '" + name + "'");
    }
    if (std::find(ev_pos.begin(), ev_pos.end(), k) != ev_pos.end()) {
      throw InvalidArgument("variable '" + name + "' appears twice in evidence");
    }
    ev_pos.push_back(k);
    ev_val.push_back(value);
  }
  std::vector<std::size_t> rest;
  std::vector<VarSpec> vars;
  for (std::size_t k = 0; k < p.arity(); ++k) {
    if (std::find(ev_pos.begin(), ev_pos.end(), k) == ev_pos.end()) {
      rest.push_back(k);
      vars.push_back(p.variable(k));
    }
  }
  CellAccumulator acc(std::move(vars));
  const SubIndex sub(p, rest);
  double mass = 0.0;
  p.for_each_nonzero([&](std::span<const std::size_t> d, double v) {
    for (std::size_t e = 0; e < ev_pos.size(); ++e) {
      if (d[ev_pos[e]] != ev_val[e]) return;
    }
    mass += v;
    acc.add(sub(d), v);
  });
  if (!(mass > 0.0)) throw UnsupportedEvidence("evidence has zero probability");
  return std::move(acc).finish().normalized();
}

double entropy(const JointDistribution& p, const Names& over) {
  const auto m = marginalize(p, over);
  if (m.is_dense()) return entropy_bits(m.dense());
  double h = 0.0;
  m.for_each_nonzero([&](std::span<const std::size_t>, double v) { h -= xlog2y(v, v); });
  return std::max(h, 0.0);
}

double entropy(const JointDistribution& p) { return entropy(p, p.names()); }

double conditional_entropy(const JointDistribution& p, const Names& target, const Names& given) {
  const auto t = sorted_positions(p, target);
  const auto g = sorted_positions(p, given);
  for (auto k : t) {
    if (std::binary_search(g.begin(), g.end(), k)) {
      throw InvalidArgument("variable '" + p.variable(k).name + "' is both target and condition");
    }
  }
  if (g.empty()) return entropy(p, target);
  Names both = target;
  both.insert(both.end(), given.begin(), given.end());
  const auto joint = marginalize(p, both);
  const auto cond = marginalize(joint, given);
  std::vector<std::size_t> given_in_joint;
  for (const auto& name : given) given_in_joint.push_back(joint.index_of(name));
  std::sort(given_in_joint.begin(), given_in_joint.end());
  given_in_joint.erase(std::unique(given_in_joint.begin(), given_in_joint.end()), given_in_joint.end());
  const SubIndex sub(joint, given_in_joint);
  double h = 0.0;
  joint.for_each_nonzero([&](std::span<const std::size_t> d, double v) {
    const double pg = cond.prob_at(sub(d));
    if (v < pg) h -= v * std::log2(v / pg);
  });
  return h;
}

double mutual_information(const JointDistribution& p, const Names& a, const Names& b) {
  Names both = a;
  both.insert(both.end(), b.begin(), b.end());
  return std::max(0.0, entropy(p, a) + entropy(p, b) - entropy(p, both));
}

double kl_divergence(const JointDistribution& p, const JointDistribution& q) {
  require_same_variables(p, q);
  if (p.is_dense() && q.is_dense()) return kl_bits(p.dense(), q.dense());
  double d = 0.0;
  bool infinite = false;
  std::uint64_t index = 0;
  p.for_each_nonzero([&](std::span<const std::size_t> digits, double v) {
    index = p.encode(Assignment(digits.begin(), digits.end()));
    const double w = q.prob_at(index);
    if (w <= 0.0) {
      infinite = true;
    } else {
      d += v * std::log2(v / w);
    }
  });
  if (infinite) return kInfiniteBits;
  return std::max(d, 0.0);
}

double max_abs_difference(const JointDistribution& p, const JointDistribution& q) {
  require_same_variables(p, q);
  if (p.is_dense() && q.is_dense()) {
    return p.cell_count() == 0 ? 0.0 : (p.dense() - q.dense()).abs().maxCoeff();
  }
  double m = 0.0;
  auto scan = [&m](const JointDistribution& a, const JointDistribution& b) {
    a.for_each_nonzero([&](std::span<const std::size_t> digits, double v) {
      const double w = b.prob_at(a.encode(Assignment(digits.begin(), digits.end())));
      m = std::max(m, std::abs(v - w));
    });
  };
  scan(p, q);
  scan(q, p);
  return m;
}

JointDistribution extend_with_function(const JointDistribution& p, VarSpec added,
                                       const std::function<std::size_t(std::span<const std::size_t>)>& fn) {
  if (p.contains(added.name)) throw InvalidArgument("variable '" + added.name + "' already exists");
  std::vector<VarSpec> vars(p.variables().begin(), p.variables().end());
  const std::size_t card = added.cardinality;
  const std::string name = added.name;
  vars.push_back(std::move(added));
  CellAccumulator acc(std::move(vars));
  std::vector<std::size_t> all(p.arity());
  for (std::size_t k = 0; k < all.size(); ++k) all[k] = k;
  const SubIndex sub(p, all);
  p.for_each_nonzero([&](std::span<const std::size_t> d, double v) {
    const std::size_t label = fn(d);
    if (label >= card) {
      throw InvalidArgument("function value " + std::to_string(label) + " out of range for '" + name + "'");
    }
    acc.add(sub(d) * card + label, v);
  });
  return std::move(acc).finish();
}

JointDistribution regroup(const JointDistribution& p, const std::vector<VarGroup>& groups) {
  std::vector<std::vector<std::size_t>> members;
  std::vector<VarSpec> vars;
  std::vector<bool> used(p.arity(), false);
  for (const auto& g : groups) {
    if (g.members.empty()) throw InvalidArgument("group '" + g.name + "' is empty");
    auto pos = positions_of(p, g.members);
    std::size_t card = 1;
    for (auto k : pos) {
      if (used[k]) throw InvalidArgument("variable '" + p.variable(k).name + "' assigned to two groups");
      used[k] = true;
      if (card > std::numeric_limits<std::size_t>::max() / p.variable(k).cardinality) {
        throw InvalidArgument("group '" + g.name + "' alphabet too large");
      }
      card *= p.variable(k).cardinality;
    }
    members.push_back(std::move(pos));
    vars.push_back({g.name, card});
  }
  for (std::size_t k = 0; k < p.arity(); ++k) {
    if (!used[k]) throw InvalidArgument("variable '" + p.variable(k).name + "' not assigned to a group");
  }
  CellAccumulator acc(vars);
  std::vector<SubIndex> subs;
  for (const auto& m : members) subs.emplace_back(p, m);
  std::vector<std::uint64_t> strides(vars.size(), 1);
  for (std::size_t k = vars.size(); k-- > 1;) strides[k - 1] = strides[k] * vars[k].cardinality;
  p.for_each_nonzero([&](std::span<const std::size_t> d, double v) {
    std::uint64_t idx = 0;
    for (std::size_t g = 0; g < subs.size(); ++g) idx += subs[g](d) * strides[g];
    acc.add(idx, v);
  });
  return std::move(acc).finish();
}

JointDistribution reorder(const JointDistribution& p, const Names& order) {
  std::vector<VarGroup> groups;
  groups.reserve(order.size());
  for (const auto& n : order) groups.push_back({n, {n}});
  return regroup(p, groups);
}

}  // namespace natlat
