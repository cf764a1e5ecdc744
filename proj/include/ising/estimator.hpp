#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "ising/model.hpp"

namespace ising {

/// Elastic-net penalty: lambda * sum_j [ (1-alpha)/2 w_j^2 + alpha |w_j| ].
/// alpha = 1 is the lasso, alpha = 0 is ridge.
struct Penalty {
  double alpha = 1.0;
  double lambda = 0.0;
};

enum class EdgeRule { AND, OR };
enum class FitMethod { full_ml, joint_pl, disjoint_pl };

/**
 * Estimation settings. For disjoint fits, either pin `lambda` (one penalized
 * fit per node) or leave it unset to select lambda per node by EBIC over
 * `lambda_grid` (the default grid when empty: 100 log-spaced values in
 * [0.001, 1]).
 *
 * Penalized objectives are scaled per observation: mean conditional
 * log-likelihood minus lambda * Pen(omega_i), the convention under which the
 * default grid is meaningful. EBIC itself uses the summed log-likelihood.
 */
struct FitConfig {
  FitMethod method = FitMethod::disjoint_pl;
  double alpha = 1.0;
  std::optional<double> lambda;
  std::vector<double> lambda_grid;
  EdgeRule edge_rule = EdgeRule::AND;
  double ebic_gamma = 0.25;
  int max_iter = 10000;
  double tol = 1e-8;
  int cv_folds = 10;
  std::uint64_t seed = 0;
  int full_ml_max_p = 10;  // full likelihood enumeration guard
};

/// Raw per-node regression output plus selection diagnostics.
struct NodeFit {
  double tau = 0.0;
  Eigen::VectorXd omega_row;  // length P, entry for the node itself is 0
  double lambda = 0.0;
  double ebic = 0.0;
  int iterations = 0;
  bool converged = true;
};

struct FitResult {
  Eigen::VectorXd tau_hat;
  Eigen::MatrixXd omega_hat;  // symmetric, zero diagonal
  std::vector<NodeFit> per_node;
  FitMethod method = FitMethod::disjoint_pl;
  std::optional<EdgeRule> edge_rule;  // set when a rule was applied
  bool converged = true;
  int iterations = 0;
};

/**
 * Cross-validation surface over (alpha, lambda): accuracy(a, l) is the
 * negative mean squared prediction error, averaged over folds, of predicting
 * each held-out response (recoded to {0,1}) by its conditional probability
 * of +1. Ties for the best cell break toward larger lambda, then smaller
 * alpha.
 */
struct CvSurface {
  std::vector<double> alpha_grid;
  std::vector<double> lambda_grid;
  Eigen::MatrixXd accuracy;  // alpha_grid.size() x lambda_grid.size()
  double best_alpha = 0.0;
  double best_lambda = 0.0;
  double best_accuracy = 0.0;
};

/// Full log-likelihood sum_rows [tau'x + sum_{i<j} w_ij x_i x_j] - N ln Z.
double log_likelihood(const IsingModel& model, const BinaryDataset& data,
                      int enumeration_cap = kDefaultEnumerationCap);

/// Conditional (logistic) log-likelihood of node i given the rest, summed
/// over rows. Needs no partition function.
double node_conditional_loglik(const IsingModel& model, const BinaryDataset& data, int i);

/// ln PL = sum over nodes of node_conditional_loglik.
double pseudolikelihood(const IsingModel& model, const BinaryDataset& data);

/// Gradient of node_conditional_loglik in (tau_i, omega_i.): entry 0 is
/// d/dtau, entries 1..P are d/domega_ij (entry i+1 fixed at zero).
Eigen::VectorXd gradient_node_loglik(const BinaryDataset& data, int i, double tau,
                                     const Eigen::VectorXd& omega_row);

/// Smallest lambda at which node i's penalized solution is all-zero, from
/// the soft-threshold stationarity condition at the intercept-only fit.
/// Requires alpha > 0.
double lambda_max(const BinaryDataset& data, int i, double alpha);

/// EBIC = -2 loglik + df ln(n) + 2 gamma df ln(p_nodes - 1).
double ebic(double loglik, int df, int n, int p_nodes, double gamma);

/// Whole-model EBIC variant using the joint pseudolikelihood and the total
/// nonzero-edge count against the P(P-1)/2 candidate edges. Experimental;
/// per-node EBIC is the supported selection path.
double ebic_global(double pseudo_loglik, int nonzero_edges, int n, int p_nodes, double gamma);

/**
 * Penalized logistic regression of node i on all other nodes, +1/-1 coding,
 * intercept unpenalized. Coordinate descent with soft-thresholding on the
 * local quadratic approximation; warm-startable. lambda = 0 reproduces the
 * unpenalized fit (and throws SeparationError when the node is constant or
 * the fit diverges); with lambda > 0 the fit always succeeds, with the
 * intercept clamped at |tau| <= 30 for degenerate columns.
 */
NodeFit fit_node_penalized(const BinaryDataset& data, int i, const Penalty& penalty,
                           const FitConfig& cfg, const NodeFit* warm_start = nullptr);

/// Newton ascent on the exact log-likelihood (enumeration-backed moments);
/// guarded at full_ml_max_p nodes. Non-convergence is flagged, not silent.
FitResult fit_full_ml(const BinaryDataset& data, const FitConfig& cfg);

/// Newton ascent on the joint pseudolikelihood with tied omega_ij = omega_ji.
/// Unpenalized (reject lambda > 0).
FitResult fit_joint_pl(const BinaryDataset& data, const FitConfig& cfg);

/**
 * Disjoint pseudolikelihood estimation: one penalized logistic regression
 * per node (lambda per node by EBIC when a grid is used), then the edge rule
 * (AND: keep iff both directed estimates are nonzero; OR: iff either) and
 * symmetrization by averaging.
 */
FitResult fit_disjoint(const BinaryDataset& data, const FitConfig& cfg);

/// Dispatch on cfg.method.
FitResult fit(const BinaryDataset& data, const FitConfig& cfg);

/**
 * K-fold cross-validation of disjoint penalized estimation over a
 * (lambda, alpha) grid. Fold assignment is a seeded shuffle dealt
 * round-robin; cells run with warm starts along descending lambda within
 * each alpha. `threads` caps worker threads (0 = hardware concurrency);
 * results are identical for any thread count.
 */
CvSurface cross_validate(const BinaryDataset& data, const std::vector<double>& lambda_grid,
                         const std::vector<double>& alpha_grid, const FitConfig& cfg,
                         int threads = 0);

/// 100 log-spaced lambdas in [0.001, 1].
std::vector<double> default_lambda_grid(int size = 100, double lo = 0.001, double hi = 1.0);

/// 100 equally spaced alphas in [0, 1].
std::vector<double> default_alpha_grid(int size = 100);

/**
 * Coding conversion: a standard 0/1 logistic fit (intercept b0, slopes b on
 * 0/1 predictors) for node i corresponds to tau_i = b0/2 + sum_j b_j/4 and
 * omega_ij = b_j/4 in the +1/-1 parameterization used here.
 */
std::pair<double, Eigen::VectorXd> from_zero_one_logistic(double b0, const Eigen::VectorXd& b);
std::pair<double, Eigen::VectorXd> to_zero_one_logistic(double tau, const Eigen::VectorXd& omega_row);

}  // namespace ising
