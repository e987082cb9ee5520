// natlat: command-line front end.
//
// Exit codes: 0 pass, 1 property or threshold failure, 2 usage or parse error.

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "natlat/examples.hpp"
#include "natlat/latent_search.hpp"
#include "natlat/naturality.hpp"
#include "natlat/rules.hpp"
#include "natlat/text.hpp"

namespace fs = std::filesystem;
using namespace natlat;

namespace {

constexpr int kPass = 0;
constexpr int kFail = 1;
constexpr int kUsage = 2;

struct RunConfig {
  std::string subcommand;
  std::vector<std::string> inputs;
  double threshold_bits = kExactTolerance;
  std::uint64_t seed = 0;
  std::size_t samples = 1000;
  bool machine = false;
  std::string chunk;
  std::string maps;
  std::string output;
  std::size_t n = 1000;
  std::string emit_model;
  std::size_t validate = 0;
  bool near_deterministic = false;
};

// Rows of key/value. Human output aligns keys; machine output is key<TAB>value.
class Table {
 public:
  explicit Table(bool machine) : machine_(machine) {}

  void bits(const std::string& key, double v) { text(key, format_fixed(v, machine_ ? 9 : 6)); }
  void count(const std::string& key, std::size_t v) { text(key, std::to_string(v)); }
  void text(const std::string& key, std::string v) { rows_.emplace_back(key, std::move(v)); }

  void print(std::ostream& os) const {
    std::size_t width = 0;
    for (const auto& [k, v] : rows_) width = std::max(width, k.size());
    for (const auto& [k, v] : rows_) {
      if (machine_) {
        os << k << '\t' << v << '\n';
      } else {
        os << k << std::string(width - k.size() + 2, ' ') << v << '\n';
      }
    }
  }

 private:
  bool machine_;
  std::vector<std::pair<std::string, std::string>> rows_;
};

bool has_roles_line(const std::string& text) {
  for (const auto& line : tokenize_lines(text)) {
    if (line.tokens[0] == "roles") return true;
  }
  return false;
}

// "A,B|C,D" -> ({A, B}, {C, D})
std::pair<Names, Names> parse_chunk_spec(const std::string& spec) {
  const auto bar = spec.find('|');
  if (bar == std::string::npos || spec.find('|', bar + 1) != std::string::npos) {
    throw InvalidArgument("chunk spec must look like 'A,B|C,D', got '" + spec + "'");
  }
  auto split = [&](const std::string& s) {
    Names out;
    std::size_t start = 0;
    while (true) {
      const auto comma = s.find(',', start);
      const auto item = s.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
      if (item.empty()) throw InvalidArgument("empty name in chunk spec '" + spec + "'");
      out.push_back(item);
      if (comma == std::string::npos) return out;
      start = comma + 1;
    }
  };
  return {split(spec.substr(0, bar)), split(spec.substr(bar + 1))};
}

void add_report(Table& t, const NaturalityReport& r, const Names& observables) {
  t.bits("eps_med", r.eps_mediation_bits);
  for (std::size_t i = 0; i < observables.size(); ++i) t.bits("eps_red[" + observables[i] + "]", r.eps_redundancy_bits[i]);
  t.bits("eps_red_max", r.eps_redundancy_max_bits);
  t.text("exact", r.is_exact ? "yes" : "no");
}

void write_or_print(const RunConfig& cfg, const std::string& text) {
  if (cfg.output.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(cfg.output);
  if (!(f << text)) throw InvalidArgument("cannot write '" + cfg.output + "'");
}

int cmd_check(const RunConfig& cfg) {
  const auto model = parse_agent_model(read_text_file(cfg.inputs.at(0)));
  const auto r = naturality_report(model);
  const bool pass = r.eps_mediation_bits <= cfg.threshold_bits && r.eps_redundancy_max_bits <= cfg.threshold_bits;
  Table t(cfg.machine);
  add_report(t, r, model.observables());
  t.text("threshold", format_shortest(cfg.threshold_bits));
  t.text("result", pass ? "pass" : "fail");
  t.print(std::cout);
  return pass ? kPass : kFail;
}

int cmd_search(const RunConfig& cfg) {
  auto p = parse_distribution(read_text_file(cfg.inputs.at(0)));
  if (!cfg.chunk.empty()) {
    const auto [a, b] = parse_chunk_spec(cfg.chunk);
    p = chunk_observables(p, a, b);
    if (p.arity() != 2) throw InvalidArgument("the two chunk blocks must cover every variable");
  } else if (p.arity() != 2) {
    throw InvalidArgument("search needs exactly two observables, got " + std::to_string(p.arity()) +
                          "; pass --chunk 'A,B|C,D' to group them");
  }

  Table t(cfg.machine);
  if (!cfg.maps.empty()) {
    const auto f = parse_label_maps(read_text_file(cfg.maps), p);
    const auto r = evaluate_candidate(p, f);
    add_report(t, r, f.observables);
    const auto dis = label_disagreement(p, f);
    for (std::size_t i = 1; i < dis.size(); ++i) t.bits("disagreement[" + f.observables[i] + "]", dis[i]);
    t.print(std::cout);
    return kPass;
  }

  const auto res = exact_natural_latent(p);
  t.count("labels", res.latent.cardinality);
  add_report(t, res.report, res.latent.observables);
  if (cfg.machine) {
    for (std::size_t i = 0; i < res.latent.observables.size(); ++i) {
      for (std::size_t v = 0; v < res.latent.labels[i].size(); ++v) {
        t.count("map[" + res.latent.observables[i] + "=" + std::to_string(v) + "]", res.latent.labels[i][v]);
      }
    }
    t.print(std::cout);
  } else {
    t.print(std::cout);
    std::cout << "\n" << format_label_maps(res.latent);
  }
  return kPass;
}

int cmd_theorem(const RunConfig& cfg) {
  const auto r = theorem_sweep({cfg.seed, cfg.samples, cfg.near_deterministic});
  Table t(cfg.machine);
  t.count("samples", r.samples);
  t.count("violations", r.violations);
  t.bits("min_slack", r.min_slack_bits);
  t.bits("max_slack", r.max_slack_bits);
  t.bits("max_conclusion", r.max_conclusion_bits);
  t.print(std::cout);
  return r.violations == 0 ? kPass : kFail;
}

int cmd_coin(const RunConfig& cfg) {
  const CoinExampleConfig coin{cfg.n};
  coin.validate();
  if (!cfg.emit_model.empty()) {
    const auto f = coin_median_latent(coin);
    const AgentModel m(with_candidate(coin_joint_model(coin), f), f.observables, {f.name});
    std::ofstream out(cfg.emit_model);
    if (!(out << format_agent_model(m))) throw InvalidArgument("cannot write '" + cfg.emit_model + "'");
  }
  Table t(cfg.machine);
  const double h = coin_median_entropy(coin);
  t.bits("H", h);
  t.bits("bound", theorem1_bound(0.0, h));
  if (!cfg.machine) {
    t.count("n", coin.n);
    t.bits("H(median|bias)", coin_conclusion_entropy(coin));
  }
  t.print(std::cout);
  return kPass;
}

int cmd_derive(const RunConfig& cfg) {
  const fs::path script_path = cfg.inputs.at(0);
  const auto base = script_path.parent_path();
  const DagResolver resolve = [&](const std::string& name) { return parse_dag(read_text_file(base / name)); };
  const auto script = parse_derivation_script(read_text_file(script_path), resolve);
  const auto& d = script.derivation;

  const DiagramJudgment* final = nullptr;
  std::string final_name;
  if (!d.steps().empty()) {
    final = &d.steps().back().result;
    final_name = d.steps().back().output;
  } else if (!d.premise_names().empty()) {
    final_name = d.premise_names().back();
    final = &d.judgment(final_name);
  } else {
    throw InvalidArgument("script has no premises or steps");
  }

  std::optional<Theorem1Replay> replay;
  if (script.claim) {
    check_determines_claim(d, *script.claim);
    try {
      replay = replay_theorem1(script);
    } catch (const RuleInapplicable&) {
    }
  }

  Table t(cfg.machine);
  t.count("steps", d.steps().size());
  t.text("final", final_name);
  t.text("epsilon", final->epsilon.to_string());
  if (replay) t.text("bound", replay->bound.to_string());
  if (script.claim) t.text("claim", "H(" + script.claim->determined + " | " + script.claim->determiner + ")");

  int status = kPass;
  if (cfg.validate > 0) {
    const auto r = validate_script(script, {.seed = cfg.seed, .samples = cfg.validate});
    t.count("validation_samples", r.samples);
    t.count("validation_checks", r.checks);
    t.count("violations", r.violations);
    t.bits("min_slack", r.min_slack_bits);
    if (!r.passed()) {
      status = kFail;
      for (const auto& f : r.failures) std::cerr << "violation: " << f << "\n";
    }
  }
  if (cfg.machine) {
    t.print(std::cout);
  } else {
    t.print(std::cout);
    std::cout << "\n" << format_dag(final->graph);
  }
  return status;
}

int cmd_chunk(const RunConfig& cfg) {
  const auto text = read_text_file(cfg.inputs.at(0));
  const auto [a, b] = parse_chunk_spec(cfg.chunk);
  if (has_roles_line(text)) {
    write_or_print(cfg, format_agent_model(chunk_observables(parse_agent_model(text), a, b)));
  } else {
    write_or_print(cfg, format_distribution(chunk_observables(parse_distribution(text), a, b)));
  }
  return kPass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Natural latents: naturality checks, exact latent search, derivations and worked examples."};
  app.require_subcommand(1);
  RunConfig cfg;

  auto* check = app.add_subcommand("check", "Mediation and redundancy errors of an agent model");
  check->add_option("model", cfg.inputs, "Agent model file")->required()->check(CLI::ExistingFile);
  check->add_option("--eps", cfg.threshold_bits, "Pass threshold in bits")->check(CLI::NonNegativeNumber);

  auto* search = app.add_subcommand("search", "Exact natural latent of a two-observable distribution");
  search->add_option("distribution", cfg.inputs, "Distribution file")->required()->check(CLI::ExistingFile);
  search->add_option("--chunk", cfg.chunk, "Group observables into two blocks, e.g. 'A,B|C,D'");
  search->add_option("--maps", cfg.maps, "Evaluate this label-map candidate instead of searching")
      ->check(CLI::ExistingFile);

  auto* theorem = app.add_subcommand("theorem", "Randomized check of the mediator-determines-redund bound");
  theorem->add_option("--seed", cfg.seed, "Random seed");
  theorem->add_option("--samples", cfg.samples, "Number of instances")->check(CLI::PositiveNumber);
  theorem->add_flag("--near-deterministic", cfg.near_deterministic, "Only draw near-exact instances");

  auto* coin = app.add_subcommand("coin", "Median of two coin-flip batches");
  coin->add_option("--n", cfg.n, "Flips per batch (even)");
  coin->add_option("--emit-model", cfg.emit_model, "Write the model over N1, N2 and Median to this file");

  auto* derive = app.add_subcommand("derive", "Replay a derivation script");
  derive->add_option("script", cfg.inputs, "Derivation script")->required()->check(CLI::ExistingFile);
  derive->add_option("--validate", cfg.validate, "Validate every step on this many random distributions");
  derive->add_option("--seed", cfg.seed, "Random seed for --validate");

  auto* chunk = app.add_subcommand("chunk", "Group observables into two blocks");
  chunk->add_option("file", cfg.inputs, "Distribution or agent model file")->required()->check(CLI::ExistingFile);
  chunk->add_option("--chunk", cfg.chunk, "Blocks, e.g. 'A,B|C,D'")->required();
  chunk->add_option("-o,--output", cfg.output, "Write here instead of stdout");

  app.add_flag("--machine", cfg.machine, "Tab-separated key/value output");
  for (auto* sub : {check, search, theorem, coin, derive}) sub->add_flag("--machine", cfg.machine, "Tab-separated key/value output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kPass : kUsage;
  }
  cfg.subcommand = app.get_subcommands().front()->get_name();

  try {
    if (cfg.subcommand == "check") return cmd_check(cfg);
    if (cfg.subcommand == "search") return cmd_search(cfg);
    if (cfg.subcommand == "theorem") return cmd_theorem(cfg);
    if (cfg.subcommand == "coin") return cmd_coin(cfg);
    if (cfg.subcommand == "derive") return cmd_derive(cfg);
    return cmd_chunk(cfg);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
}
