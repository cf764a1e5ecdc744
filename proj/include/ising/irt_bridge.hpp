#pragma once

#include <Eigen/Core>
#include <utility>

#include "ising/model.hpp"

namespace ising {

/**
 * Multidimensional 2-parameter-logistic model: P x M discrimination matrix A
 * (rows are items) and item difficulties delta. Item responses are +1/-1 with
 *
 *   Pr(X_i = x_i | theta) = exp(x_i (a_i'theta - delta_i)) / sum_{x_i} exp(...)
 *
 * and local independence across items given theta.
 */
struct MirtModel {
  MirtModel(Eigen::MatrixXd a_in, Eigen::VectorXd delta_in);

  int p() const { return static_cast<int>(a.rows()); }
  int m() const { return static_cast<int>(a.cols()); }

  Eigen::MatrixXd a;
  Eigen::VectorXd delta;
};

/**
 * Record of the eigendecomposition behind an Ising -> MIRT conversion:
 * Omega + shift_c * I == q * diag(lambda) * q', eigenvalues descending and
 * nonnegative, eigenvector signs fixed so each column's largest-magnitude
 * entry is positive (first such entry on ties). rank counts eigenvalues
 * above rank_tol relative to the largest.
 */
struct EigenBridge {
  double shift_c = 0.0;
  Eigen::MatrixXd q;
  Eigen::VectorXd lambda;
  int rank = 0;
};

/// Gaussian posterior of the latent traits given a response pattern:
/// independent dimensions, mean = A'x / 2, common sd = sqrt(1/2).
struct LatentPosterior {
  Eigen::VectorXd mean;
  double sd = 0.0;
};

/// Gauss-Hermite rule for the weight exp(-t^2): integral ~ sum w_k f(t_k).
struct GaussHermite {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
};

/// Nodes and weights via Golub-Welsch on the Hermite Jacobi matrix.
GaussHermite gauss_hermite(int n);

/**
 * Equivalent MIRT model of an Ising model. The diagonal shift is
 * c = -min eigenvalue of Omega, making the smallest shifted eigenvalue
 * exactly zero; delta = -tau; column j of A is -2*sqrt(lambda_j/2)*q_j
 * taking the negative root, under the sign convention recorded in
 * EigenBridge. Columns with lambda_j at or below rank_tol (relative to the
 * largest eigenvalue) are exactly zero.
 */
std::pair<MirtModel, EigenBridge> ising_to_mirt(const IsingModel& model,
                                                double rank_tol = 1e-8);

/**
 * Equivalent Ising model of a MIRT model: Omega = A A'/2 with the diagonal
 * zeroed (the diagonal cancels in Z), tau = -delta. `bridge_shift` is the
 * recorded conversion shift; it is reference information only, since the
 * zero-diagonal canonical form discards any uniform diagonal.
 */
IsingModel mirt_to_ising(const MirtModel& mirt, double bridge_shift = 0.0);

/// Pr(X = x | theta): product of per-item logistic terms (local independence).
double mirt_conditional(const MirtModel& mirt, const BinaryState& x,
                        const Eigen::VectorXd& theta);

/**
 * Marginal Pr(X = x) by Gauss-Hermite tensor quadrature over the latent
 * density, normalized so the probabilities of all 2^P states sum to one.
 * Dimensions whose A column is zero integrate out analytically; at most
 * three nonzero dimensions are accepted (tensor quadrature guard).
 */
double mirt_marginal(const MirtModel& mirt, const BinaryState& x,
                     int quadrature_nodes = 40,
                     int enumeration_cap = kDefaultEnumerationCap);

/// All 2^P marginal probabilities in canonical state order (one quadrature
/// sweep; use this instead of per-state mirt_marginal calls in loops).
Eigen::VectorXd mirt_marginal_table(const MirtModel& mirt, int quadrature_nodes = 40,
                                    int enumeration_cap = kDefaultEnumerationCap);

/// Closed-form posterior N(A'x / 2, sqrt(1/2) I) of theta given x.
LatentPosterior latent_posterior(const MirtModel& mirt, const BinaryState& x);

/**
 * Marginal density of latent dimension `dim` on a grid: the mixture of
 * N((A'x)_dim / 2, sqrt(1/2)) components weighted by the exact Ising state
 * probabilities of the equivalent model.
 */
Eigen::VectorXd latent_marginal_density(const MirtModel& mirt, int dim,
                                        const Eigen::VectorXd& grid,
                                        int enumeration_cap = kDefaultEnumerationCap);

/// Latent prior density f(theta) in mixture form (sum over all states of
/// posterior Gaussians times exact state probabilities).
double latent_prior_density(const MirtModel& mirt, const Eigen::VectorXd& theta,
                            int enumeration_cap = kDefaultEnumerationCap);

/// Numerical rank of the network: count of shifted eigenvalues above
/// rank_tol * largest, plus the full shifted spectrum (descending). The
/// rank equals the number of latent dimensions of the equivalent MIRT model.
std::pair<int, Eigen::VectorXd> rank_of_network(const IsingModel& model,
                                                double rank_tol = 1e-8);

}  // namespace ising
