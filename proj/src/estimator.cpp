#include "ising/estimator.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>

#include "ising/rng.hpp"

namespace ising {

namespace {

constexpr double kParamClamp = 30.0;   // logistic saturation guard
constexpr double kWeightFloor = 1e-10;

double clamp_param(double v) { return std::clamp(v, -kParamClamp, kParamClamp); }

/// ln(exp(eta) + exp(-eta)) without overflow.
double log_two_cosh(double eta) {
  const double a = std::abs(eta);
  return a + std::log1p(std::exp(-2.0 * a));
}

double intercept_only_tau(const Eigen::VectorXd& y) {
  const double mean = std::clamp(y.mean(), -1.0 + 1e-12, 1.0 - 1e-12);
  return std::atanh(mean);
}

bool is_constant_column(const Eigen::VectorXd& y) {
  return std::abs(y.sum()) == static_cast<double>(y.size());
}

void run_tasks(int n_tasks, int threads, const std::function<void(int)>& task) {
  if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
  if (threads < 1) threads = 1;
  threads = std::min(threads, n_tasks);
  if (threads <= 1) {
    for (int t = 0; t < n_tasks; ++t) task(t);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(threads);
  std::exception_ptr error;
  std::mutex error_mutex;
  for (int w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      while (true) {
        const int t = next.fetch_add(1);
        if (t >= n_tasks) break;
        try {
          task(t);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace

double log_likelihood(const IsingModel& model, const BinaryDataset& data, int enumeration_cap) {
  if (data.p() != model.p()) throw std::invalid_argument("log_likelihood: dimension mismatch");
  const double log_z = std::log(partition_function(model, enumeration_cap));
  double total = 0.0;
  for (int r = 0; r < data.n(); ++r) {
    total -= model.beta * hamiltonian(model, BinaryState(data.rows.row(r).transpose()));
  }
  return total - data.n() * log_z;
}

namespace {

double node_loglik_at(const BinaryDataset& data, int i, double tau,
                      const Eigen::VectorXd& omega_row, double beta = 1.0) {
  const int p = data.p();
  double total = 0.0;
  for (int r = 0; r < data.n(); ++r) {
    double eta = tau;
    for (int j = 0; j < p; ++j) {
      if (j != i) eta += omega_row[j] * data.rows(r, j);
    }
    eta *= beta;
    total += data.rows(r, i) * eta - log_two_cosh(eta);
  }
  return total;
}

}  // namespace

double node_conditional_loglik(const IsingModel& model, const BinaryDataset& data, int i) {
  if (data.p() != model.p()) {
    throw std::invalid_argument("node_conditional_loglik: dimension mismatch");
  }
  if (i < 0 || i >= model.p()) {
    throw std::invalid_argument("node_conditional_loglik: node index out of range");
  }
  return node_loglik_at(data, i, model.tau[i], model.omega.row(i), model.beta);
}

double pseudolikelihood(const IsingModel& model, const BinaryDataset& data) {
  double total = 0.0;
  for (int i = 0; i < model.p(); ++i) total += node_conditional_loglik(model, data, i);
  return total;
}

Eigen::VectorXd gradient_node_loglik(const BinaryDataset& data, int i, double tau,
                                     const Eigen::VectorXd& omega_row) {
  const int p = data.p();
  if (i < 0 || i >= p) throw std::invalid_argument("gradient_node_loglik: bad node index");
  if (omega_row.size() != p) {
    throw std::invalid_argument("gradient_node_loglik: omega_row must have length P");
  }
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(p + 1);
  for (int r = 0; r < data.n(); ++r) {
    double eta = tau;
    for (int j = 0; j < p; ++j) {
      if (j != i) eta += omega_row[j] * data.rows(r, j);
    }
    const double resid = data.rows(r, i) - std::tanh(eta);
    grad[0] += resid;
    for (int j = 0; j < p; ++j) {
      if (j != i) grad[1 + j] += data.rows(r, j) * resid;
    }
  }
  return grad;
}

double lambda_max(const BinaryDataset& data, int i, double alpha) {
  if (!(alpha > 0.0)) throw std::invalid_argument("lambda_max: alpha > 0 required");
  const int p = data.p();
  if (i < 0 || i >= p) throw std::invalid_argument("lambda_max: bad node index");
  const double tau0 = intercept_only_tau(data.rows.col(i));
  const double t = std::tanh(tau0);
  double best = 0.0;
  for (int j = 0; j < p; ++j) {
    if (j == i) continue;
    double dot = 0.0;
    for (int r = 0; r < data.n(); ++r) dot += data.rows(r, j) * (data.rows(r, i) - t);
    best = std::max(best, std::abs(dot) / data.n());
  }
  return best / alpha;
}

double ebic(double loglik, int df, int n, int p_nodes, double gamma) {
  if (df < 0) throw std::invalid_argument("ebic: df >= 0 required");
  if (n < 1) throw std::invalid_argument("ebic: n >= 1 required");
  if (p_nodes < 2) throw std::invalid_argument("ebic: p_nodes >= 2 required");
  if (gamma < 0.0) throw std::invalid_argument("ebic: gamma >= 0 required");
  return -2.0 * loglik + df * std::log(static_cast<double>(n)) +
         2.0 * gamma * df * std::log(static_cast<double>(p_nodes - 1));
}

double ebic_global(double pseudo_loglik, int nonzero_edges, int n, int p_nodes, double gamma) {
  if (p_nodes < 2) throw std::invalid_argument("ebic_global: p_nodes >= 2 required");
  const double candidates = p_nodes * (p_nodes - 1) / 2.0;
  return -2.0 * pseudo_loglik + nonzero_edges * std::log(static_cast<double>(n)) +
         2.0 * gamma * nonzero_edges * std::log(candidates);
}

NodeFit fit_node_penalized(const BinaryDataset& data, int i, const Penalty& penalty,
                           const FitConfig& cfg, const NodeFit* warm_start) {
  const int p = data.p();
  const int n = data.n();
  if (i < 0 || i >= p) throw std::invalid_argument("fit_node_penalized: bad node index");
  if (penalty.lambda < 0.0 || penalty.alpha < 0.0 || penalty.alpha > 1.0) {
    throw std::invalid_argument("fit_node_penalized: invalid penalty");
  }
  const Eigen::VectorXd y = data.rows.col(i);
  const bool unpenalized = penalty.lambda == 0.0;
  if (unpenalized && is_constant_column(y)) {
    throw SeparationError("fit_node_penalized: node " + std::to_string(i) +
                          " is constant; the unpenalized fit is separated");
  }

  NodeFit fit;
  fit.omega_row = Eigen::VectorXd::Zero(p);
  fit.lambda = penalty.lambda;
  if (warm_start) {
    fit.tau = warm_start->tau;
    fit.omega_row = warm_start->omega_row;
    fit.omega_row[i] = 0.0;
  } else {
    fit.tau = clamp_param(intercept_only_tau(y));
  }

  const double l1 = penalty.lambda * penalty.alpha;
  const double l2 = penalty.lambda * (1.0 - penalty.alpha);

  Eigen::VectorXd eta(n);
  Eigen::VectorXd weight(n);
  Eigen::VectorXd work_resid(n);  // z - fitted, under the current weights
  const double inner_tol = cfg.tol;

  auto recompute_eta = [&] {
    for (int r = 0; r < n; ++r) {
      double e = fit.tau;
      for (int j = 0; j < p; ++j) {
        if (j != i) e += fit.omega_row[j] * data.rows(r, j);
      }
      eta[r] = e;
    }
  };

  recompute_eta();
  bool converged = false;
  int outer = 0;
  for (; outer < cfg.max_iter && !converged; ++outer) {
    // Quadratic approximation at the current fit.
    double weight_sum = 0.0;
    for (int r = 0; r < n; ++r) {
      const double t = std::tanh(eta[r]);
      const double h = std::max(1.0 - t * t, kWeightFloor);
      weight[r] = h;
      work_resid[r] = (y[r] - t) / h;
      weight_sum += h;
    }
    const double mean_weight = weight_sum / n;

    const double tau_before = fit.tau;
    const Eigen::VectorXd omega_before = fit.omega_row;

    // Coordinate descent on the penalized weighted least squares.
    for (int pass = 0; pass < 1000; ++pass) {
      double max_change = 0.0;

      double num = 0.0;
      for (int r = 0; r < n; ++r) num += weight[r] * work_resid[r];
      double tau_new = clamp_param(fit.tau + num / weight_sum);
      double delta = tau_new - fit.tau;
      if (delta != 0.0) {
        for (int r = 0; r < n; ++r) work_resid[r] -= delta;
        fit.tau = tau_new;
        max_change = std::max(max_change, std::abs(delta));
      }

      for (int j = 0; j < p; ++j) {
        if (j == i) continue;
        double rho = 0.0;
        for (int r = 0; r < n; ++r) rho += weight[r] * data.rows(r, j) * work_resid[r];
        rho = rho / n + mean_weight * fit.omega_row[j];
        double w_new;
        if (rho > l1) {
          w_new = (rho - l1) / (mean_weight + l2);
        } else if (rho < -l1) {
          w_new = (rho + l1) / (mean_weight + l2);
        } else {
          w_new = 0.0;
        }
        w_new = clamp_param(w_new);
        delta = w_new - fit.omega_row[j];
        if (delta != 0.0) {
          for (int r = 0; r < n; ++r) work_resid[r] -= delta * data.rows(r, j);
          fit.omega_row[j] = w_new;
          max_change = std::max(max_change, std::abs(delta));
        }
      }
      if (max_change < inner_tol) break;
    }

    recompute_eta();
    double outer_change = std::abs(fit.tau - tau_before);
    for (int j = 0; j < p; ++j) {
      outer_change = std::max(outer_change, std::abs(fit.omega_row[j] - omega_before[j]));
    }
    converged = outer_change < cfg.tol;
  }
  fit.iterations = outer;
  fit.converged = converged;

  if (unpenalized) {
    const double max_param =
        std::max(std::abs(fit.tau), fit.omega_row.cwiseAbs().maxCoeff());
    if (max_param >= kParamClamp) {
      throw SeparationError("fit_node_penalized: node " + std::to_string(i) +
                            " diverged at lambda = 0 (separated data)");
    }
  }
  return fit;
}

namespace {

// Parameter vector layout shared by the exact-likelihood and joint
// pseudolikelihood fits: tau_0..tau_{P-1}, then omega_{ij} for i<j.
struct ParamLayout {
  explicit ParamLayout(int p_in) : p(p_in) {
    pair_index.assign(p * p, -1);
    int k = p;
    for (int i = 0; i < p; ++i) {
      for (int j = i + 1; j < p; ++j) {
        pair_index[i * p + j] = pair_index[j * p + i] = k++;
      }
    }
    dim = k;
  }

  int omega_at(int i, int j) const { return pair_index[i * p + j]; }

  IsingModel to_model(const Eigen::VectorXd& theta) const {
    Eigen::VectorXd tau = theta.head(p);
    Eigen::MatrixXd omega = Eigen::MatrixXd::Zero(p, p);
    for (int i = 0; i < p; ++i) {
      for (int j = i + 1; j < p; ++j) {
        omega(i, j) = omega(j, i) = theta[omega_at(i, j)];
      }
    }
    return IsingModel(std::move(tau), std::move(omega));
  }

  int p;
  int dim;
  std::vector<int> pair_index;
};

Eigen::VectorXd observed_sufficient_stats(const BinaryDataset& data, const ParamLayout& layout) {
  Eigen::VectorXd stats = Eigen::VectorXd::Zero(layout.dim);
  const int p = data.p();
  for (int r = 0; r < data.n(); ++r) {
    for (int i = 0; i < p; ++i) {
      stats[i] += data.rows(r, i);
      for (int j = i + 1; j < p; ++j) {
        stats[layout.omega_at(i, j)] += data.rows(r, i) * data.rows(r, j);
      }
    }
  }
  return stats;
}

void check_no_constant_node(const BinaryDataset& data, const char* where) {
  for (int i = 0; i < data.p(); ++i) {
    if (is_constant_column(data.rows.col(i))) {
      throw SeparationError(std::string(where) + ": node " + std::to_string(i) +
                            " is constant in the data (separated likelihood)");
    }
  }
}

}  // namespace

FitResult fit_full_ml(const BinaryDataset& data, const FitConfig& cfg) {
  const int p = data.p();
  if (p > cfg.full_ml_max_p) {
    throw CapExceededError("fit_full_ml: P = " + std::to_string(p) +
                           " exceeds the exact-likelihood guard of " +
                           std::to_string(cfg.full_ml_max_p));
  }
  check_no_constant_node(data, "fit_full_ml");

  const ParamLayout layout(p);
  const Eigen::VectorXd observed = observed_sufficient_stats(data, layout);
  const int n = data.n();

  Eigen::VectorXd theta = Eigen::VectorXd::Zero(layout.dim);
  for (int i = 0; i < p; ++i) theta[i] = intercept_only_tau(data.rows.col(i));

  const std::uint64_t n_states = std::uint64_t{1} << p;
  Eigen::MatrixXd state_stats(layout.dim, static_cast<Eigen::Index>(n_states));
  for (std::uint64_t s = 0; s < n_states; ++s) {
    for (int i = 0; i < p; ++i) {
      const double xi = (s >> i) & 1 ? 1.0 : -1.0;
      state_stats(i, static_cast<Eigen::Index>(s)) = xi;
      for (int j = i + 1; j < p; ++j) {
        const double xj = (s >> j) & 1 ? 1.0 : -1.0;
        state_stats(layout.omega_at(i, j), static_cast<Eigen::Index>(s)) = xi * xj;
      }
    }
  }

  auto loglik_at = [&](const Eigen::VectorXd& th) {
    const IsingModel model = layout.to_model(th);
    return observed.dot(th) - n * std::log(partition_function(model, p));
  };

  FitResult result;
  result.method = FitMethod::full_ml;
  bool converged = false;
  int iter = 0;
  double current = loglik_at(theta);
  for (; iter < cfg.max_iter && !converged; ++iter) {
    const IsingModel model = layout.to_model(theta);
    const StateDistribution dist = full_distribution(model, p);
    const Eigen::VectorXd expected = state_stats * dist.probabilities;
    Eigen::MatrixXd second = Eigen::MatrixXd::Zero(layout.dim, layout.dim);
    for (std::uint64_t s = 0; s < n_states; ++s) {
      const auto col = state_stats.col(static_cast<Eigen::Index>(s));
      second.noalias() += dist.probabilities[static_cast<Eigen::Index>(s)] * col * col.transpose();
    }
    const Eigen::MatrixXd covariance =
        second - expected * expected.transpose() +
        1e-12 * Eigen::MatrixXd::Identity(layout.dim, layout.dim);
    const Eigen::VectorXd grad = observed - n * expected;

    Eigen::VectorXd direction = covariance.ldlt().solve(grad / n);
    if (!direction.allFinite() || grad.dot(direction) <= 0.0) {
      direction = grad / n;  // fallback: plain gradient ascent direction
    }

    double step = 1.0;
    double candidate_value = 0.0;
    Eigen::VectorXd candidate;
    while (true) {
      candidate = theta + step * direction;
      candidate_value = loglik_at(candidate);
      if (candidate_value >= current || step < 1e-12) break;
      step /= 2.0;
    }
    const double move = (step * direction).cwiseAbs().maxCoeff();
    theta = candidate;
    current = candidate_value;
    converged = move < cfg.tol;
  }

  const IsingModel fitted = layout.to_model(theta);
  result.tau_hat = fitted.tau;
  result.omega_hat = fitted.omega;
  result.converged = converged;
  result.iterations = iter;
  return result;
}

FitResult fit_joint_pl(const BinaryDataset& data, const FitConfig& cfg) {
  if (cfg.lambda.value_or(0.0) != 0.0) {
    throw std::invalid_argument("fit_joint_pl: penalized joint fits are not supported");
  }
  check_no_constant_node(data, "fit_joint_pl");
  const int p = data.p();
  const int n = data.n();
  const ParamLayout layout(p);

  auto pl_at = [&](const Eigen::VectorXd& th) {
    const IsingModel model = layout.to_model(th);
    return pseudolikelihood(model, data);
  };

  Eigen::VectorXd theta = Eigen::VectorXd::Zero(layout.dim);
  for (int i = 0; i < p; ++i) theta[i] = intercept_only_tau(data.rows.col(i));

  FitResult result;
  result.method = FitMethod::joint_pl;
  bool converged = false;
  int iter = 0;
  double current = pl_at(theta);
  Eigen::MatrixXd eta(n, p);
  for (; iter < cfg.max_iter && !converged; ++iter) {
    const IsingModel model = layout.to_model(theta);
    for (int r = 0; r < n; ++r) {
      for (int i = 0; i < p; ++i) {
        double e = model.tau[i];
        for (int j = 0; j < p; ++j) {
          if (j != i) e += model.omega(i, j) * data.rows(r, j);
        }
        eta(r, i) = e;
      }
    }
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(layout.dim);
    Eigen::MatrixXd hess_neg = Eigen::MatrixXd::Zero(layout.dim, layout.dim);
    Eigen::VectorXd design(p);  // nonzero pattern of d eta_i / d theta
    std::vector<int> slots(p);
    for (int r = 0; r < n; ++r) {
      for (int i = 0; i < p; ++i) {
        const double t = std::tanh(eta(r, i));
        const double resid = data.rows(r, i) - t;
        const double h = 1.0 - t * t;
        int count = 0;
        slots[count] = i;
        design[count++] = 1.0;
        for (int j = 0; j < p; ++j) {
          if (j == i) continue;
          slots[count] = layout.omega_at(i, j);
          design[count++] = data.rows(r, j);
        }
        for (int a = 0; a < count; ++a) {
          grad[slots[a]] += design[a] * resid;
          for (int b = 0; b < count; ++b) {
            hess_neg(slots[a], slots[b]) += h * design[a] * design[b];
          }
        }
      }
    }
    hess_neg += 1e-12 * Eigen::MatrixXd::Identity(layout.dim, layout.dim);

    Eigen::VectorXd direction = hess_neg.ldlt().solve(grad);
    if (!direction.allFinite() || grad.dot(direction) <= 0.0) direction = grad / n;

    double step = 1.0;
    Eigen::VectorXd candidate;
    double candidate_value = 0.0;
    while (true) {
      candidate = theta + step * direction;
      candidate_value = pl_at(candidate);
      if (candidate_value >= current || step < 1e-12) break;
      step /= 2.0;
    }
    const double move = (step * direction).cwiseAbs().maxCoeff();
    theta = candidate;
    current = candidate_value;
    converged = move < cfg.tol;
  }

  const IsingModel fitted = layout.to_model(theta);
  result.tau_hat = fitted.tau;
  result.omega_hat = fitted.omega;
  result.converged = converged;
  result.iterations = iter;
  return result;
}

namespace {

// Symmetrize raw per-node rows under the edge rule: AND keeps an edge iff
// both directed estimates are nonzero, OR iff either; kept edges average the
// two estimates (a zero side contributes zero).
void assemble_symmetric(const std::vector<NodeFit>& fits, EdgeRule rule,
                        Eigen::VectorXd& tau_hat, Eigen::MatrixXd& omega_hat) {
  const int p = static_cast<int>(fits.size());
  tau_hat.resize(p);
  omega_hat = Eigen::MatrixXd::Zero(p, p);
  for (int i = 0; i < p; ++i) tau_hat[i] = fits[i].tau;
  for (int i = 0; i < p; ++i) {
    for (int j = i + 1; j < p; ++j) {
      const double wij = fits[i].omega_row[j];
      const double wji = fits[j].omega_row[i];
      const bool keep = rule == EdgeRule::AND ? (wij != 0.0 && wji != 0.0)
                                              : (wij != 0.0 || wji != 0.0);
      if (keep) omega_hat(i, j) = omega_hat(j, i) = (wij + wji) / 2.0;
    }
  }
}

}  // namespace

FitResult fit_disjoint(const BinaryDataset& data, const FitConfig& cfg) {
  const int p = data.p();
  const int n = data.n();
  FitResult result;
  result.method = FitMethod::disjoint_pl;
  result.edge_rule = cfg.edge_rule;
  result.per_node.resize(p);

  if (p == 1) {
    // Threshold-only model: no predictors, no penalty involved.
    const Eigen::VectorXd y = data.rows.col(0);
    if (cfg.lambda.value_or(0.0) == 0.0 && is_constant_column(y)) {
      throw SeparationError("fit_disjoint: node 0 is constant; unpenalized fit is separated");
    }
    NodeFit fit;
    fit.tau = clamp_param(intercept_only_tau(y));
    fit.omega_row = Eigen::VectorXd::Zero(1);
    fit.lambda = cfg.lambda.value_or(0.0);
    fit.ebic = -2.0 * node_loglik_at(data, 0, fit.tau, fit.omega_row);
    result.per_node[0] = fit;
    result.tau_hat = Eigen::VectorXd::Constant(1, fit.tau);
    result.omega_hat = Eigen::MatrixXd::Zero(1, 1);
    return result;
  }

  for (int i = 0; i < p; ++i) {
    try {
      if (cfg.lambda.has_value()) {
        NodeFit fit = fit_node_penalized(data, i, Penalty{cfg.alpha, *cfg.lambda}, cfg);
        const int df = (fit.omega_row.array() != 0.0).count();
        fit.ebic = ebic(node_loglik_at(data, i, fit.tau, fit.omega_row), df, n, p, cfg.ebic_gamma);
        result.per_node[i] = fit;
      } else {
        // Per-node lambda by EBIC along a descending-lambda path with warm
        // starts; equal EBIC prefers the smaller lambda.
        std::vector<double> grid = cfg.lambda_grid.empty() ? default_lambda_grid() : cfg.lambda_grid;
        std::sort(grid.begin(), grid.end(), std::greater<double>());
        NodeFit best;
        double best_ebic = 0.0;
        bool have_best = false;
        const NodeFit* warm = nullptr;
        NodeFit path_fit;
        for (double lam : grid) {
          path_fit = fit_node_penalized(data, i, Penalty{cfg.alpha, lam}, cfg, warm);
          warm = &path_fit;
          const int df = (path_fit.omega_row.array() != 0.0).count();
          const double value =
              ebic(node_loglik_at(data, i, path_fit.tau, path_fit.omega_row), df, n, p,
                   cfg.ebic_gamma);
          if (!have_best || value <= best_ebic) {
            best = path_fit;
            best.ebic = value;
            best_ebic = value;
            have_best = true;
          }
        }
        result.per_node[i] = best;
      }
    } catch (const SeparationError& err) {
      throw SeparationError(std::string(err.what()) + " [disjoint fit, node " +
                            std::to_string(i) + "]");
    }
  }

  assemble_symmetric(result.per_node, cfg.edge_rule, result.tau_hat, result.omega_hat);
  for (const auto& fit : result.per_node) {
    result.converged = result.converged && fit.converged;
    result.iterations = std::max(result.iterations, fit.iterations);
  }
  return result;
}

FitResult fit(const BinaryDataset& data, const FitConfig& cfg) {
  switch (cfg.method) {
    case FitMethod::full_ml:
      return fit_full_ml(data, cfg);
    case FitMethod::joint_pl:
      return fit_joint_pl(data, cfg);
    case FitMethod::disjoint_pl:
      return fit_disjoint(data, cfg);
  }
  throw std::invalid_argument("fit: unknown method");
}

CvSurface cross_validate(const BinaryDataset& data, const std::vector<double>& lambda_grid,
                         const std::vector<double>& alpha_grid, const FitConfig& cfg,
                         int threads) {
  const int n = data.n();
  const int p = data.p();
  const int folds = cfg.cv_folds;
  if (folds < 2) throw std::invalid_argument("cross_validate: at least 2 folds required");
  if (folds > n) throw std::invalid_argument("cross_validate: more folds than observations");
  if (lambda_grid.empty() || alpha_grid.empty()) {
    throw std::invalid_argument("cross_validate: empty tuning grid");
  }

  // Seeded shuffle dealt round-robin into folds.
  std::vector<int> order(n);
  for (int r = 0; r < n; ++r) order[r] = r;
  Rng rng(cfg.seed);
  for (int r = n - 1; r > 0; --r) {
    std::swap(order[r], order[rng.below(static_cast<std::uint64_t>(r + 1))]);
  }
  std::vector<int> fold_of(n);
  for (int k = 0; k < n; ++k) fold_of[order[k]] = k % folds;

  std::vector<double> lambdas = lambda_grid;
  std::sort(lambdas.begin(), lambdas.end(), std::greater<double>());
  const int n_lambda = static_cast<int>(lambdas.size());
  const int n_alpha = static_cast<int>(alpha_grid.size());

  // fold x alpha tasks; each fills sq_error[a][l][f].
  std::vector<Eigen::MatrixXd> sq_error(n_alpha, Eigen::MatrixXd::Zero(n_lambda, folds));

  auto task = [&](int t) {
    const int a = t / folds;
    const int f = t % folds;
    const double alpha = alpha_grid[a];

    int n_test = 0;
    for (int r = 0; r < n; ++r) n_test += fold_of[r] == f;
    const int n_train = n - n_test;
    if (n_train < 1 || n_test < 1) {
      throw std::invalid_argument("cross_validate: fold without train or test rows");
    }
    Eigen::MatrixXd train(n_train, p), test(n_test, p);
    int tr = 0, te = 0;
    for (int r = 0; r < n; ++r) {
      if (fold_of[r] == f) {
        test.row(te++) = data.rows.row(r);
      } else {
        train.row(tr++) = data.rows.row(r);
      }
    }
    const BinaryDataset train_data(train);

    FitConfig node_cfg = cfg;
    node_cfg.alpha = alpha;
    std::vector<NodeFit> fits(p);
    std::vector<const NodeFit*> warm(p, nullptr);
    std::vector<NodeFit> prev(p);
    for (int l = 0; l < n_lambda; ++l) {
      for (int i = 0; i < p; ++i) {
        fits[i] = fit_node_penalized(train_data, i, Penalty{alpha, lambdas[l]}, node_cfg, warm[i]);
        prev[i] = fits[i];
        warm[i] = &prev[i];
      }
      Eigen::VectorXd tau_hat;
      Eigen::MatrixXd omega_hat;
      assemble_symmetric(fits, cfg.edge_rule, tau_hat, omega_hat);

      double total_sq = 0.0;
      for (int r = 0; r < n_test; ++r) {
        for (int i = 0; i < p; ++i) {
          double eta = tau_hat[i];
          for (int j = 0; j < p; ++j) {
            if (j != i) eta += omega_hat(i, j) * test(r, j);
          }
          const double prob_plus = 0.5 * (1.0 + std::tanh(eta));
          const double observed01 = (test(r, i) + 1.0) / 2.0;
          const double diff = prob_plus - observed01;
          total_sq += diff * diff;
        }
      }
      sq_error[a](l, f) = total_sq / (static_cast<double>(n_test) * p);
    }
  };
  run_tasks(n_alpha * folds, threads, task);

  CvSurface surface;
  surface.alpha_grid = alpha_grid;
  surface.lambda_grid = lambdas;
  surface.accuracy.resize(n_alpha, n_lambda);
  for (int a = 0; a < n_alpha; ++a) {
    for (int l = 0; l < n_lambda; ++l) {
      surface.accuracy(a, l) = -sq_error[a].row(l).mean();
    }
  }

  bool have_best = false;
  for (int a = 0; a < n_alpha; ++a) {
    for (int l = 0; l < n_lambda; ++l) {
      const double acc = surface.accuracy(a, l);
      const bool better =
          !have_best || acc > surface.best_accuracy ||
          (acc == surface.best_accuracy &&
           (lambdas[l] > surface.best_lambda ||
            (lambdas[l] == surface.best_lambda && alpha_grid[a] < surface.best_alpha)));
      if (better) {
        surface.best_accuracy = acc;
        surface.best_alpha = alpha_grid[a];
        surface.best_lambda = lambdas[l];
        have_best = true;
      }
    }
  }
  return surface;
}

std::vector<double> default_lambda_grid(int size, double lo, double hi) {
  if (size < 1 || !(lo > 0.0) || !(hi >= lo)) {
    throw std::invalid_argument("default_lambda_grid: bad arguments");
  }
  std::vector<double> grid(size);
  if (size == 1) {
    grid[0] = lo;
    return grid;
  }
  const double log_lo = std::log(lo), log_hi = std::log(hi);
  for (int k = 0; k < size; ++k) {
    grid[k] = std::exp(log_lo + (log_hi - log_lo) * k / (size - 1));
  }
  return grid;
}

std::vector<double> default_alpha_grid(int size) {
  if (size < 1) throw std::invalid_argument("default_alpha_grid: bad size");
  std::vector<double> grid(size);
  if (size == 1) {
    grid[0] = 0.0;
    return grid;
  }
  for (int k = 0; k < size; ++k) grid[k] = static_cast<double>(k) / (size - 1);
  return grid;
}

std::pair<double, Eigen::VectorXd> from_zero_one_logistic(double b0, const Eigen::VectorXd& b) {
  const double tau = b0 / 2.0 + b.sum() / 4.0;
  return {tau, b / 4.0};
}

std::pair<double, Eigen::VectorXd> to_zero_one_logistic(double tau,
                                                        const Eigen::VectorXd& omega_row) {
  const double b0 = 2.0 * tau - 2.0 * omega_row.sum();
  return {b0, 4.0 * omega_row};
}

}  // namespace ising
