#include "ising/sampler.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ising {

namespace {

void check_sampler_config(const SamplerConfig& cfg) {
  if (cfg.n_samples < 1) throw std::invalid_argument("sampler: n_samples >= 1 required");
  if (cfg.thin < 1) throw std::invalid_argument("sampler: thin >= 1 required");
  if (cfg.burn_in < 0) throw std::invalid_argument("sampler: burn_in >= 0 required");
}

}  // namespace

BinaryDataset sample_exact(const IsingModel& model, const SamplerConfig& cfg,
                           int enumeration_cap) {
  check_sampler_config(cfg);
  const StateDistribution dist = full_distribution(model, enumeration_cap);
  std::vector<double> cumulative(dist.size());
  double acc = 0.0;
  for (std::uint64_t s = 0; s < dist.size(); ++s) {
    acc += dist.probabilities[static_cast<Eigen::Index>(s)];
    cumulative[s] = acc;
  }
  cumulative.back() = 1.0;

  Rng rng(cfg.seed);
  const int p = model.p();
  Eigen::MatrixXd rows(cfg.n_samples, p);
  for (int r = 0; r < cfg.n_samples; ++r) {
    const double u = rng.uniform();
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    const std::uint64_t s = static_cast<std::uint64_t>(it - cumulative.begin());
    for (int i = 0; i < p; ++i) rows(r, i) = (s >> i) & 1 ? 1.0 : -1.0;
  }
  return BinaryDataset(std::move(rows));
}

BinaryDataset sample_gibbs(const IsingModel& model, const SamplerConfig& cfg) {
  check_sampler_config(cfg);
  Rng rng(cfg.seed);
  const int p = model.p();
  Eigen::VectorXd state(p);
  for (int i = 0; i < p; ++i) state[i] = rng.uniform() < 0.5 ? -1.0 : 1.0;

  Eigen::MatrixXd rows(cfg.n_samples, p);
  int collected = 0;
  for (int sweep = 1; collected < cfg.n_samples; ++sweep) {
    for (int i = 0; i < p; ++i) {
      const double prob_plus = conditional_node_full(model, i, state);
      state[i] = rng.uniform() < prob_plus ? 1.0 : -1.0;
    }
    if (sweep > cfg.burn_in && (sweep - cfg.burn_in) % cfg.thin == 0) {
      rows.row(collected++) = state;
    }
  }
  return BinaryDataset(std::move(rows));
}

IsingModel generate_scale_free_model(const NetworkGenConfig& cfg) {
  if (cfg.p < 2) throw std::invalid_argument("generate_scale_free_model: p >= 2 required");
  if (cfg.weight_low > cfg.weight_high || cfg.thresh_low > cfg.thresh_high) {
    throw std::invalid_argument("generate_scale_free_model: invalid parameter ranges");
  }
  if (cfg.attach_prob < 0.0 || cfg.attach_prob > 1.0) {
    throw std::invalid_argument("generate_scale_free_model: attach_prob must be in [0,1]");
  }
  Rng rng(cfg.seed);
  const int p = cfg.p;
  Eigen::MatrixXd adjacency = Eigen::MatrixXd::Zero(p, p);

  // Preferential-attachment skeleton: endpoint pool holds each edge's two
  // endpoints, so a uniform pick is degree-proportional.
  std::vector<int> endpoint_pool;
  for (int node = 1; node < p; ++node) {
    int target;
    if (endpoint_pool.empty()) {
      target = static_cast<int>(rng.below(static_cast<std::uint64_t>(node)));
    } else {
      target = endpoint_pool[rng.below(endpoint_pool.size())];
    }
    adjacency(node, target) = adjacency(target, node) = 1.0;
    endpoint_pool.push_back(node);
    endpoint_pool.push_back(target);
  }
  // Additional random connections on the remaining pairs.
  if (cfg.attach_prob > 0.0) {
    for (int i = 0; i < p; ++i) {
      for (int j = i + 1; j < p; ++j) {
        if (adjacency(i, j) == 0.0 && rng.uniform() < cfg.attach_prob) {
          adjacency(i, j) = adjacency(j, i) = 1.0;
        }
      }
    }
  }

  Eigen::VectorXd tau(p);
  for (int i = 0; i < p; ++i) tau[i] = rng.uniform(cfg.thresh_low, cfg.thresh_high);
  Eigen::MatrixXd omega = Eigen::MatrixXd::Zero(p, p);
  for (int i = 0; i < p; ++i) {
    for (int j = i + 1; j < p; ++j) {
      if (adjacency(i, j) != 0.0) {
        const double w = rng.uniform(cfg.weight_low, cfg.weight_high);
        omega(i, j) = omega(j, i) = w;
      }
    }
  }
  return IsingModel(std::move(tau), std::move(omega));
}

MirtSample generate_mirt_dataset(const MirtGenConfig& cfg) {
  if (cfg.p < 2) throw std::invalid_argument("generate_mirt_dataset: p >= 2 required");
  if (cfg.n < 1) throw std::invalid_argument("generate_mirt_dataset: n >= 1 required");
  if (!(std::abs(cfg.factor_corr) < 1.0)) {
    throw std::invalid_argument("generate_mirt_dataset: |factor_corr| < 1 required");
  }
  std::vector<int> factor_of_item = cfg.factor_of_item;
  if (factor_of_item.empty()) {
    factor_of_item.resize(cfg.p);
    for (int i = 0; i < cfg.p; ++i) factor_of_item[i] = i < cfg.p / 2 ? 0 : 1;
  }
  if (static_cast<int>(factor_of_item.size()) != cfg.p) {
    throw std::invalid_argument("generate_mirt_dataset: loading pattern size mismatch");
  }
  int m = 0;
  for (int f : factor_of_item) {
    if (f < 0) throw std::invalid_argument("generate_mirt_dataset: negative factor index");
    m = std::max(m, f + 1);
  }

  Rng rng(cfg.seed);

  Eigen::VectorXd delta(cfg.p);
  if (cfg.fixed_difficulties) {
    if (cfg.fixed_difficulties->size() != cfg.p) {
      throw std::invalid_argument("generate_mirt_dataset: fixed_difficulties size mismatch");
    }
    delta = *cfg.fixed_difficulties;
  } else {
    for (int i = 0; i < cfg.p; ++i) delta[i] = rng.normal();
  }

  // Unit-variance factors with exchangeable correlation factor_corr.
  Eigen::MatrixXd corr = Eigen::MatrixXd::Constant(m, m, cfg.factor_corr);
  corr.diagonal().setOnes();
  Eigen::LLT<Eigen::MatrixXd> llt(corr);
  if (llt.info() != Eigen::Success) {
    throw std::invalid_argument("generate_mirt_dataset: correlation matrix not positive definite");
  }
  const Eigen::MatrixXd chol = llt.matrixL();

  Eigen::MatrixXd loadings = Eigen::MatrixXd::Zero(cfg.p, m);
  for (int i = 0; i < cfg.p; ++i) loadings(i, factor_of_item[i]) = 1.0;

  if (cfg.fixed_thetas &&
      (cfg.fixed_thetas->rows() != cfg.n || cfg.fixed_thetas->cols() != m)) {
    throw std::invalid_argument("generate_mirt_dataset: fixed_thetas shape mismatch");
  }

  Eigen::MatrixXd thetas(cfg.n, m);
  Eigen::MatrixXd rows(cfg.n, cfg.p);
  Eigen::VectorXd z(m);
  for (int r = 0; r < cfg.n; ++r) {
    if (cfg.fixed_thetas) {
      thetas.row(r) = cfg.fixed_thetas->row(r);
    } else {
      for (int j = 0; j < m; ++j) z[j] = rng.normal();
      thetas.row(r) = (chol * z).transpose();
    }
    for (int i = 0; i < cfg.p; ++i) {
      const double linear = loadings.row(i).dot(thetas.row(r)) - delta[i];
      // Pr(X_i = +1 | theta) in the +1/-1 response coding.
      const double prob_plus = 0.5 * (1.0 + std::tanh(linear));
      rows(r, i) = rng.uniform() < prob_plus ? 1.0 : -1.0;
    }
  }
  return MirtSample{BinaryDataset(std::move(rows)),
                    MirtModel(std::move(loadings), std::move(delta)), std::move(thetas)};
}

}  // namespace ising
