#include "natlat/latent_search.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>

#include "natlat/text.hpp"

namespace natlat {

namespace {

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
  std::size_t find(std::size_t v) {
    while (parent_[v] != v) v = parent_[v] = parent_[parent_[v]];
    return v;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent_[std::max(a, b)] = std::min(a, b);
  }

 private:
  std::vector<std::size_t> parent_;
};

std::string free_name(const JointDistribution& p, std::string name) {
  while (p.contains(name)) name += "~";
  return name;
}

void require_total(const JointDistribution& p, const DeterministicLatent& f) {
  if (f.observables.empty()) throw InvalidArgument("candidate latent has no label maps");
  if (f.labels.size() != f.observables.size()) throw InvalidArgument("one label map per observable is required");
  for (std::size_t i = 0; i < f.observables.size(); ++i) {
    const auto card = p.variable(p.index_of(f.observables[i])).cardinality;
    if (f.labels[i].size() != card) {
      throw InvalidArgument("label map for '" + f.observables[i] + "' covers " + std::to_string(f.labels[i].size()) +
                            " of " + std::to_string(card) + " values");
    }
    for (std::size_t v = 0; v < card; ++v) {
      if (f.labels[i][v] == kNoLabel) {
        throw InvalidArgument("label map for '" + f.observables[i] + "' has no label for value " + std::to_string(v));
      }
      if (f.labels[i][v] >= f.cardinality) throw InvalidArgument("label exceeds the latent's cardinality");
    }
  }
}

}  // namespace

bool DeterministicLatent::is_total() const {
  return std::all_of(labels.begin(), labels.end(), [](const auto& m) {
    return std::find(m.begin(), m.end(), kNoLabel) == m.end();
  });
}

LatentSearchResult exact_natural_latent(const JointDistribution& p) {
  if (p.arity() != 2) {
    throw InvalidArgument("exact search needs exactly two observables, got " + std::to_string(p.arity()) +
                          "; chunk them into two blocks first");
  }
  const auto c1 = p.variable(0).cardinality, c2 = p.variable(1).cardinality;
  UnionFind uf(c1 + c2);
  std::vector<bool> seen1(c1, false), seen2(c2, false);
  p.for_each_nonzero([&](std::span<const std::size_t> d, double v) {
    if (v <= kSupportThreshold) return;
    uf.unite(d[0], c1 + d[1]);
    seen1[d[0]] = seen2[d[1]] = true;
  });

  DeterministicLatent f;
  f.observables = p.names();
  f.labels.assign(2, {});
  f.labels[0].assign(c1, 0);
  f.labels[1].assign(c2, 0);
  std::map<std::size_t, std::size_t> label_of_root;
  for (std::size_t x = 0; x < c1; ++x) {
    if (!seen1[x]) continue;
    const auto root = uf.find(x);
    const auto it = label_of_root.try_emplace(root, label_of_root.size()).first;
    f.labels[0][x] = it->second;
  }
  for (std::size_t x = 0; x < c2; ++x) {
    if (seen2[x]) f.labels[1][x] = label_of_root.at(uf.find(c1 + x));
  }
  f.cardinality = std::max<std::size_t>(1, label_of_root.size());
  f.name = free_name(p, f.name);

  LatentSearchResult r{f, {}, with_candidate(p, f), false};
  r.report = naturality_report(AgentModel(r.joint, f.observables, {f.name}));
  r.exact = r.report.is_exact;
  return r;
}

JointDistribution with_candidate(const JointDistribution& p, const DeterministicLatent& f) {
  require_total(p, f);
  if (p.contains(f.name)) throw InvalidArgument("latent name '" + f.name + "' clashes with a variable");
  const auto k = p.index_of(f.observables[0]);
  const auto& map = f.labels[0];
  return extend_with_function(p, {f.name, f.cardinality}, [&](std::span<const std::size_t> d) { return map[d[k]]; });
}

NaturalityReport evaluate_candidate(const JointDistribution& p, const DeterministicLatent& f) {
  const auto joint = with_candidate(p, f);
  Names keep = f.observables;
  keep.push_back(f.name);
  const auto m = keep.size() == joint.arity() ? joint : marginalize(joint, keep);
  return naturality_report(AgentModel(m, f.observables, {f.name}));
}

std::vector<double> label_disagreement(const JointDistribution& p, const DeterministicLatent& f) {
  require_total(p, f);
  std::vector<std::size_t> pos;
  for (const auto& o : f.observables) pos.push_back(p.index_of(o));
  std::vector<double> out(f.observables.size(), 0.0);
  p.for_each_nonzero([&](std::span<const std::size_t> d, double v) {
    const auto l = f.labels[0][d[pos[0]]];
    for (std::size_t i = 1; i < pos.size(); ++i) {
      if (f.labels[i][d[pos[i]]] != l) out[i] += v;
    }
  });
  return out;
}

std::string block_name(const Names& block) {
  std::string s;
  for (const auto& n : block) s += (s.empty() ? "" : "+") + n;
  return s;
}

JointDistribution chunk_observables(const JointDistribution& p, const Names& first, const Names& second) {
  if (first.empty() || second.empty()) throw InvalidArgument("both blocks of a chunking must be nonempty");
  std::set<std::string> in_blocks;
  for (const auto* block : {&first, &second}) {
    for (const auto& n : *block) {
      p.index_of(n);
      if (!in_blocks.insert(n).second) throw InvalidArgument("'" + n + "' appears in both blocks");
    }
  }
  std::vector<VarGroup> groups{{block_name(first), first}, {block_name(second), second}};
  for (const auto& n : p.names()) {
    if (!in_blocks.count(n)) groups.push_back({n, {n}});
  }
  return regroup(p, groups);
}

AgentModel chunk_observables(const AgentModel& m, const Names& first, const Names& second) {
  const std::set<std::string> obs(m.observables().begin(), m.observables().end());
  std::set<std::string> covered;
  for (const auto* block : {&first, &second}) {
    for (const auto& n : *block) {
      if (!obs.count(n)) throw InvalidArgument("'" + n + "' is not an observable");
      covered.insert(n);
    }
  }
  if (covered.size() != obs.size()) throw InvalidArgument("the two blocks must cover every observable");
  return AgentModel(chunk_observables(m.joint(), first, second), {block_name(first), block_name(second)},
                    m.latents());
}

DeterministicLatent parse_label_maps(std::string_view text, const JointDistribution& p) {
  DeterministicLatent f;
  std::size_t max_label = 0;
  bool any = false;
  for (const auto& line : tokenize_lines(text)) {
    const auto& t = line.tokens;
    if (t[0] != "map") throw ParseError(line.number, "unknown directive '" + t[0] + "'");
    if (t.size() != 4) throw ParseError(line.number, "expected 'map <observable> <value> <label>'");
    if (!p.contains(t[1])) throw ParseError(line.number, "unknown observable '" + t[1] + "'");
    const auto card = p.variable(p.index_of(t[1])).cardinality;
    const auto value = parse_index(t[2], line.number);
    const auto label = parse_index(t[3], line.number);
    if (value >= card) {
      throw ParseError(line.number, "value " + t[2] + " out of range for '" + t[1] + "' (" + std::to_string(card) + ")");
    }
    if (label == kNoLabel) throw ParseError(line.number, "label out of range");
    auto it = std::find(f.observables.begin(), f.observables.end(), t[1]);
    if (it == f.observables.end()) {
      f.observables.push_back(t[1]);
      f.labels.emplace_back(card, kNoLabel);
      it = f.observables.end() - 1;
    }
    auto& slot = f.labels[static_cast<std::size_t>(it - f.observables.begin())][value];
    if (slot != kNoLabel) throw ParseError(line.number, "value " + t[2] + " of '" + t[1] + "' mapped twice");
    slot = label;
    max_label = std::max(max_label, label);
    any = true;
  }
  if (!any) throw ParseError(0, "no 'map' lines");
  f.cardinality = max_label + 1;
  f.name = free_name(p, f.name);
  return f;
}

std::string format_label_maps(const DeterministicLatent& f) {
  std::string s;
  for (std::size_t i = 0; i < f.observables.size(); ++i) {
    for (std::size_t v = 0; v < f.labels[i].size(); ++v) {
      if (f.labels[i][v] == kNoLabel) continue;
      s += "map " + f.observables[i] + " " + std::to_string(v) + " " + std::to_string(f.labels[i][v]) + "\n";
    }
  }
  return s;
}

}  // namespace natlat
