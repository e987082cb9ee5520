#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "natlat/distribution.hpp"
#include "natlat/text.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int status = -1;
  std::string out;
};

Run run(const std::string& args) {
  const std::string cmd = std::string(NATLAT_CLI) + " " + args + " 2>&1";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::array<char, 4096> buf{};
  std::size_t got = 0;
  while ((got = fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), got);
  const int raw = pclose(pipe);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

std::string data(const std::string& name) { return "'" + (fs::path(NATLAT_DATA_DIR) / name).string() + "'"; }

std::map<std::string, std::string> rows(const std::string& machine) {
  std::map<std::string, std::string> out;
  std::istringstream in(machine);
  std::string line;
  while (std::getline(in, line)) {
    const auto tab = line.find('\t');
    REQUIRE(tab != std::string::npos);
    out[line.substr(0, tab)] = line.substr(tab + 1);
  }
  return out;
}

double num(const std::map<std::string, std::string>& r, const std::string& key) {
  REQUIRE(r.count(key));
  return std::stod(r.at(key));
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "natlat_cli_test";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("check") {
  auto r = run("check --machine " + data("exact_natural.model"));
  CHECK(r.status == 0);
  auto k = rows(r.out);
  CHECK(num(k, "eps_med") == 0.0);
  CHECK(num(k, "eps_red_max") == 0.0);
  CHECK(k["result"] == "pass");

  r = run("check --machine " + data("noisy.model"));
  CHECK(r.status == 1);
  k = rows(r.out);
  // H(L | X1) for a 10% flip of a fair bit is h(0.1).
  CHECK(num(k, "eps_red[X1]") == doctest::Approx(0.468995594).epsilon(1e-8));
  CHECK(run("check --eps 0.5 " + data("noisy.model")).status == 0);

  const auto bad = scratch("bad.model");
  {
    std::ofstream f(bad);
    f << "vars L:2 X1:2 X2:2\nroles obs:X1,X2 latent:L\n0 0 0 0.5\n1 1 banana 0.5\n";
  }
  r = run("check '" + bad.string() + "'");
  CHECK(r.status == 2);
  CHECK(r.out.find("line 4") != std::string::npos);
  CHECK(run("check --eps -1 " + data("noisy.model")).status == 2);
  CHECK(run("check /nonexistent/file").status == 2);
}

TEST_CASE("coin model through check") {
  const auto path = scratch("coin.model");
  auto r = run("coin --machine --emit-model '" + path.string() + "'");
  CHECK(r.status == 0);
  r = run("check --machine --eps 0.1 '" + path.string() + "'");
  CHECK(r.status == 1);  // the median does not mediate the two batches
  const auto k = rows(r.out);
  CHECK(num(k, "eps_red[N1]") <= 1e-9);
  CHECK(num(k, "eps_red[N2]") == doctest::Approx(0.058).epsilon(0.001 / 0.058));
  fs::remove(path);
}

TEST_CASE("search") {
  auto r = run("search --machine " + data("blocks.dist"));
  CHECK(r.status == 0);
  auto k = rows(r.out);
  CHECK(k["labels"] == "2");
  CHECK(num(k, "eps_med") == 0.0);
  CHECK(k["map[X1=1]"] == k["map[X2=0]"]);
  CHECK(k["map[X1=2]"] != k["map[X1=0]"]);

  r = run("search --machine " + data("connected.dist"));
  CHECK(r.status == 0);
  k = rows(r.out);
  CHECK(k["labels"] == "1");
  const auto p = natlat::parse_distribution(natlat::read_text_file(fs::path(NATLAT_DATA_DIR) / "connected.dist"));
  // I(X1; X2) by hand: sum p log p / (p1 p2)
  double mi = 0.0;
  for (std::size_t a = 0; a < 2; ++a) {
    for (std::size_t b = 0; b < 2; ++b) {
      const double pab = p.prob({a, b});
      mi += pab * std::log2(pab / (0.5 * 0.5));
    }
  }
  CHECK(num(k, "eps_med") == doctest::Approx(mi).epsilon(1e-8));

  r = run("search " + data("three.dist"));
  CHECK(r.status == 2);
  CHECK(r.out.find("--chunk") != std::string::npos);
  r = run("search --machine --chunk 'A,B|C' " + data("three.dist"));
  CHECK(r.status == 0);
  CHECK(rows(r.out)["exact"] == "yes");
  CHECK(run("search --chunk 'A|A' " + data("three.dist")).status == 2);
  CHECK(run("search --chunk 'A' " + data("three.dist")).status == 2);
}

TEST_CASE("search with a candidate") {
  const auto maps = scratch("median.maps");
  {
    std::ofstream f(maps);
    f << "map X1 0 0\nmap X1 1 1\nmap X2 0 0\nmap X2 1 1\n";
  }
  const auto r = run("search --machine --maps '" + maps.string() + "' " + data("connected.dist"));
  CHECK(r.status == 0);
  const auto k = rows(r.out);
  CHECK(num(k, "eps_red[X1]") == 0.0);
  CHECK(num(k, "disagreement[X2]") == doctest::Approx(0.2).epsilon(1e-9));
}

TEST_CASE("theorem") {
  auto r = run("theorem --machine --samples 300 --seed 7");
  CHECK(r.status == 0);
  auto k = rows(r.out);
  CHECK(k["samples"] == "300");
  CHECK(k["violations"] == "0");
  CHECK(run("theorem --machine --samples 300 --seed 7").out == r.out);
  CHECK(run("theorem --machine --samples 300 --seed 8").out != r.out);

  r = run("theorem --machine --samples 200 --near-deterministic");
  CHECK(r.status == 0);
  CHECK(rows(r.out)["violations"] == "0");
  CHECK(run("theorem --samples 0").status == 2);
}

TEST_CASE("coin") {
  auto r = run("coin --machine");
  CHECK(r.status == 0);
  const auto k = rows(r.out);
  CHECK(k.size() == 2);
  CHECK(num(k, "H") == doctest::Approx(0.058).epsilon(0.001 / 0.058));
  CHECK(num(k, "bound") == doctest::Approx(0.116).epsilon(0.002 / 0.116));
  CHECK(run("coin --n 7").status == 2);
  CHECK(run("coin --n 0").status == 2);
  r = run("coin --n 2");
  CHECK(r.status == 0);
  CHECK(r.out.find("H(median|bias)") != std::string::npos);
}

TEST_CASE("derive") {
  auto r = run("derive --machine --validate 200 " + data("theorem1.deriv"));
  CHECK(r.status == 0);
  const auto k = rows(r.out);
  CHECK(k.at("epsilon") == "e_1 + e_2 + e_med");
  CHECK(k.at("bound") == "e_med + 2*e_red");
  CHECK(k.at("violations") == "0");
  CHECK(k.at("validation_samples") == "200");

  r = run("derive " + data("theorem1.deriv"));
  CHECK(r.status == 0);
  CHECK(r.out.find("edge Lp~ X2") != std::string::npos);

  r = run("derive " + data("conflict.deriv"));
  CHECK(r.status == 2);
  CHECK(r.out.find("'X' and 'Y'") != std::string::npos);
  CHECK(r.out.find("line 14") != std::string::npos);
}

TEST_CASE("derive resolves dag files next to the script") {
  const auto dir = scratch("resolver");
  fs::create_directories(dir);
  {
    std::ofstream(dir / "chain.dag") << "nodes A B C\nedge A B\nedge B C\n";
    std::ofstream(dir / "complete.dag") << "nodes A B C\nedge A B\nedge B C\nedge A C\n";
    std::ofstream(dir / "s.deriv") << "premise c chain.dag eps e_c\nstep bookkeeping c complete.dag -> out\n";
  }
  const auto r = run("derive --machine --validate 50 '" + (dir / "s.deriv").string() + "'");
  CHECK(r.status == 0);
  CHECK(rows(r.out).at("epsilon") == "e_c");
  CHECK(run("derive '" + (dir / "missing.deriv").string() + "'").status == 2);
  {
    std::ofstream(dir / "t.deriv") << "premise c nowhere.dag eps e_c\n";
  }
  CHECK(run("derive '" + (dir / "t.deriv").string() + "'").status == 2);
}

TEST_CASE("chunk") {
  auto r = run("chunk --chunk 'A|B,C' " + data("three.dist"));
  CHECK(r.status == 0);
  const auto p = natlat::parse_distribution(r.out);
  CHECK(p.names() == natlat::Names{"A", "B+C"});
  CHECK(p.total_mass() == doctest::Approx(1.0));

  const auto out = scratch("chunked.model");
  r = run("chunk --chunk 'X1|X2' -o '" + out.string() + "' " + data("noisy.model"));
  CHECK(r.status == 0);
  CHECK(run("check --eps 0.5 '" + out.string() + "'").status == 0);
  CHECK(run("chunk " + data("three.dist")).status == 2);
}

TEST_CASE("usage errors") {
  CHECK(run("").status == 2);
  CHECK(run("frobnicate").status == 2);
  CHECK(run("coin --bogus").status == 2);
  CHECK(run("--help").status == 0);
}
