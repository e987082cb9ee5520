#include "natlat/examples.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/beta.hpp>

#include <cmath>

#include "natlat/numeric.hpp"
#include "natlat/text.hpp"

namespace natlat {

void CoinExampleConfig::validate() const {
  if (n < 2 || n % 2 != 0) throw InvalidArgument("flips per batch must be even and at least 2, got " + std::to_string(n));
}

namespace {

// log k! for k = 0..max
Eigen::ArrayXd log_factorials(std::size_t max) {
  Eigen::ArrayXd lf(static_cast<Eigen::Index>(max + 1));
  for (Eigen::Index k = 0; k < lf.size(); ++k) lf[k] = std::lgamma(static_cast<double>(k) + 1.0);
  return lf;
}

}  // namespace

Eigen::ArrayXXd coin_log_conditional(const CoinExampleConfig& cfg) {
  cfg.validate();
  const auto n = static_cast<Eigen::Index>(cfg.n);
  const Eigen::ArrayXd lf = log_factorials(2 * cfg.n + 1);
  const Eigen::ArrayXd head = lf.head(n + 1);
  // Terms in N1 alone.
  const Eigen::ArrayXd row_terms = -head - head.reverse();
  Eigen::ArrayXXd lp(n + 1, n + 1);
  for (Eigen::Index n2 = 0; n2 <= n; ++n2) {
    const double col = lf[n + 1] - lf[n2] - lf[n - n2] + lf[n] - lf[2 * n + 1];
    lp.col(n2) = col + row_terms + lf.segment(n2, n + 1) + lf.segment(n - n2, n + 1).reverse();
  }
  return lp;
}

CoinMedianPosterior coin_median_posterior(const CoinExampleConfig& cfg) {
  const auto lp = coin_log_conditional(cfg);
  const auto h = static_cast<Eigen::Index>(cfg.median_threshold());
  const auto cols = lp.cols();
  CoinMedianPosterior post{Eigen::ArrayXd(cols), Eigen::ArrayXd(cols), 0.0};
  for (Eigen::Index n2 = 0; n2 < cols; ++n2) {
    post.label0[n2] = std::exp(log_sum_exp(lp.col(n2).head(h)));
    post.label1[n2] = std::exp(log_sum_exp(lp.col(n2).tail(lp.rows() - h)));
  }
  post.max_normalization_error = (post.label0 + post.label1 - 1.0).abs().maxCoeff();
  return post;
}

double coin_median_entropy(const CoinExampleConfig& cfg) {
  const auto post = coin_median_posterior(cfg);
  double h = 0.0;
  for (Eigen::Index n2 = 0; n2 < post.label0.size(); ++n2) {
    h -= xlog2y(post.label0[n2], post.label0[n2]) + xlog2y(post.label1[n2], post.label1[n2]);
  }
  return h / static_cast<double>(post.label0.size());
}

double coin_theorem_bound(const CoinExampleConfig& cfg) { return theorem1_bound(0.0, coin_median_entropy(cfg)); }

double coin_conclusion_entropy(const CoinExampleConfig& cfg) {
  cfg.validate();
  const double k = static_cast<double>(cfg.median_threshold());
  const double n = static_cast<double>(cfg.n);
  // P[Bin(n, lambda) >= k] = I_lambda(k, n - k + 1)
  auto f = [&](double lambda) { return binary_entropy(boost::math::ibeta(k, n - k + 1.0, lambda)); };
  using Rule = boost::math::quadrature::gauss_kronrod<double, 61>;
  const double mid = k / n;
  return Rule::integrate(f, 0.0, mid, 20, 1e-13) + Rule::integrate(f, mid, 1.0, 20, 1e-13);
}

JointDistribution coin_joint_model(const CoinExampleConfig& cfg) {
  const auto lp = coin_log_conditional(cfg);
  const double p_n2 = 1.0 / static_cast<double>(cfg.n + 1);
  return JointDistribution::tabulate({{"N1", cfg.n + 1}, {"N2", cfg.n + 1}}, [&](const Assignment& a) {
    return p_n2 * std::exp(lp(static_cast<Eigen::Index>(a[0]), static_cast<Eigen::Index>(a[1])));
  });
}

DeterministicLatent coin_median_latent(const CoinExampleConfig& cfg) {
  cfg.validate();
  DeterministicLatent f;
  f.name = "Median";
  f.observables = {"N1", "N2"};
  f.cardinality = 2;
  std::vector<std::size_t> map(cfg.n + 1);
  for (std::size_t v = 0; v <= cfg.n; ++v) map[v] = v < cfg.median_threshold() ? 0 : 1;
  f.labels = {map, map};
  return f;
}

// ---------------------------------------------------------------------------

std::vector<std::vector<std::size_t>> compositions(std::size_t total, std::size_t parts) {
  if (parts == 0) throw InvalidArgument("compositions need at least one part");
  std::vector<std::vector<std::size_t>> out;
  std::vector<std::size_t> cur(parts, 0);
  auto fill = [&](auto&& self, std::size_t i, std::size_t left) -> void {
    if (i + 1 == parts) {
      cur[i] = left;
      out.push_back(cur);
      return;
    }
    for (std::size_t v = 0; v <= left; ++v) {
      cur[i] = v;
      self(self, i + 1, left - v);
    }
  };
  fill(fill, 0, total);
  return out;
}

namespace {

void validate_die(const DieFixtureConfig& cfg) {
  if (cfg.faces < 2) throw InvalidArgument("a die needs at least two faces");
  if (cfg.rolls_per_chunk < 1) throw InvalidArgument("each chunk needs at least one roll");
  if (!(cfg.concentration > 0.0)) throw InvalidArgument("concentration must be positive");
}

void require_cells(double cells) {
  if (cells > static_cast<double>(kDenseCellLimit)) {
    throw InvalidArgument("fixture needs " + format_shortest(cells) + " cells; the dense limit is " +
                          std::to_string(kDenseCellLimit));
  }
}

// Normalized prior weights over the grid rows.
Eigen::ArrayXd die_prior(const Eigen::ArrayXXd& grid, double alpha) {
  const Eigen::ArrayXd logw = (alpha - 1.0) * grid.log().rowwise().sum();
  return (logw - log_sum_exp(logw)).exp();
}

}  // namespace

Eigen::ArrayXXd die_bias_grid(const DieFixtureConfig& cfg) {
  validate_die(cfg);
  const auto points = compositions(cfg.grid_resolution, cfg.faces);
  const double denom = static_cast<double>(cfg.grid_resolution) + 0.5 * static_cast<double>(cfg.faces);
  Eigen::ArrayXXd grid(static_cast<Eigen::Index>(points.size()), static_cast<Eigen::Index>(cfg.faces));
  for (std::size_t g = 0; g < points.size(); ++g) {
    for (std::size_t i = 0; i < cfg.faces; ++i) {
      grid(static_cast<Eigen::Index>(g), static_cast<Eigen::Index>(i)) =
          (static_cast<double>(points[g][i]) + 0.5) / denom;
    }
  }
  return grid;
}

AgentModel die_fixture(const DieFixtureConfig& cfg) {
  const auto grid = die_bias_grid(cfg);
  const auto counts = compositions(cfg.rolls_per_chunk, cfg.faces);
  const auto g_count = static_cast<std::size_t>(grid.rows());
  require_cells(static_cast<double>(g_count) * static_cast<double>(counts.size()) * static_cast<double>(counts.size()));

  const Eigen::ArrayXd prior = die_prior(grid, cfg.concentration);
  const Eigen::ArrayXXd log_grid = grid.log();
  // likelihood(g, c) = multinomial probability of count vector c under grid point g
  Eigen::ArrayXXd likelihood(grid.rows(), static_cast<Eigen::Index>(counts.size()));
  const double lm = std::lgamma(static_cast<double>(cfg.rolls_per_chunk) + 1.0);
  for (Eigen::Index c = 0; c < likelihood.cols(); ++c) {
    const auto& k = counts[static_cast<std::size_t>(c)];
    double coef = lm;
    Eigen::ArrayXd kk(static_cast<Eigen::Index>(cfg.faces));
    for (std::size_t i = 0; i < cfg.faces; ++i) {
      coef -= std::lgamma(static_cast<double>(k[i]) + 1.0);
      kk[static_cast<Eigen::Index>(i)] = static_cast<double>(k[i]);
    }
    likelihood.col(c) = (coef + (log_grid.rowwise() * kk.transpose()).rowwise().sum()).exp();
  }
  auto joint = JointDistribution::tabulate({{"Bias", g_count}, {"C1", counts.size()}, {"C2", counts.size()}},
                                           [&](const Assignment& a) {
                                             const auto g = static_cast<Eigen::Index>(a[0]);
                                             return prior[g] * likelihood(g, static_cast<Eigen::Index>(a[1])) *
                                                    likelihood(g, static_cast<Eigen::Index>(a[2]));
                                           });
  return AgentModel(std::move(joint), {"C1", "C2"}, {"Bias"});
}

AgentModel die_rolls_fixture(const DieFixtureConfig& cfg) {
  const auto grid = die_bias_grid(cfg);
  const std::size_t rolls = 2 * cfg.rolls_per_chunk;
  require_cells(static_cast<double>(grid.rows()) * std::pow(static_cast<double>(cfg.faces), static_cast<double>(rolls)));
  const Eigen::ArrayXd prior = die_prior(grid, cfg.concentration);

  std::vector<VarSpec> vars{{"Bias", static_cast<std::size_t>(grid.rows())}};
  Names obs;
  for (std::size_t r = 1; r <= rolls; ++r) {
    obs.push_back("R" + std::to_string(r));
    vars.push_back({obs.back(), cfg.faces});
  }
  auto joint = JointDistribution::tabulate(vars, [&](const Assignment& a) {
    const auto g = static_cast<Eigen::Index>(a[0]);
    double p = prior[g];
    for (std::size_t r = 1; r <= rolls; ++r) p *= grid(g, static_cast<Eigen::Index>(a[r]));
    return p;
  });
  return AgentModel(std::move(joint), std::move(obs), {"Bias"});
}

}  // namespace natlat
