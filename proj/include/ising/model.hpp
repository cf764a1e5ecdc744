#pragma once

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <vector>

#include "ising/errors.hpp"

namespace ising {

/// Exact operations enumerate all 2^P states; above this node count they
/// refuse unless the caller raises the cap explicitly.
inline constexpr int kDefaultEnumerationCap = 20;

/**
 * A single configuration of the P binary variables, entries in {-1, +1}.
 *
 * Canonical state order is lexicographic with node 0 fastest-varying and
 * -1 before +1: bit i of the canonical index is 1 iff node i equals +1.
 */
class BinaryState {
public:
  explicit BinaryState(Eigen::VectorXd values);

  /// State at position `index` of the canonical order for p nodes.
  static BinaryState from_index(std::uint64_t index, int p);

  /// Position of this state in the canonical order.
  std::uint64_t index() const;

  int size() const { return static_cast<int>(values_.size()); }
  double operator[](int i) const { return values_[i]; }
  const Eigen::VectorXd& values() const { return values_; }

private:
  Eigen::VectorXd values_;
};

/**
 * Ising model over P binary (+1/-1) nodes: thresholds tau, symmetric
 * pairwise weights omega with zero diagonal, inverse temperature beta.
 *
 * The canonical stored form keeps the diagonal of omega at exactly zero
 * (it is unidentified: x_i^2 = 1 folds any diagonal into the normalizing
 * constant). The constructor rejects asymmetry beyond 1e-9 and diagonal
 * entries beyond 1e-9, and canonicalizes smaller deviations.
 *
 * Pair terms sum over unordered pairs i<j exactly once. Against the matrix
 * form exp(tau'x + x'Wx/2) this means omega here equals W with zeroed
 * diagonal, not W/2.
 */
struct IsingModel {
  IsingModel(Eigen::VectorXd tau_in, Eigen::MatrixXd omega_in, double beta_in = 1.0);

  int p() const { return static_cast<int>(tau.size()); }

  Eigen::VectorXd tau;
  Eigen::MatrixXd omega;
  double beta = 1.0;
};

/**
 * Exhaustive table over all 2^P states in canonical order: the raw Gibbs
 * potentials exp(-beta H(x)), their sum z, and the normalized probabilities.
 *
 * States are not materialized; state(index) reconstructs them on demand.
 * Distributions produced by marginalize() store potentials == probabilities
 * and z == 1 (a PMRF is not a PMRF under marginalization, so no canonical
 * potential exists for the marginal).
 */
struct StateDistribution {
  int p = 0;
  Eigen::VectorXd potentials;
  Eigen::VectorXd probabilities;
  double z = 0.0;

  std::uint64_t size() const { return static_cast<std::uint64_t>(potentials.size()); }
  BinaryState state(std::uint64_t index) const { return BinaryState::from_index(index, p); }
};

/// N x P matrix of observations, every cell exactly -1 or +1.
struct BinaryDataset {
  explicit BinaryDataset(Eigen::MatrixXd rows_in, std::vector<std::string> column_names_in = {});

  int n() const { return static_cast<int>(rows.rows()); }
  int p() const { return static_cast<int>(rows.cols()); }

  Eigen::MatrixXd rows;
  std::vector<std::string> column_names;  // empty or exactly p() entries
};

/// Strictly positive node potential (phi(-1), phi(+1)).
struct NodePotential {
  double at_minus = 1.0;
  double at_plus = 1.0;
};

/// Strictly positive 2x2 pair potential; table[a][b] is phi(x_i, x_j) with
/// index 0 meaning -1 and 1 meaning +1.
struct PairPotential {
  int i = 0;
  int j = 0;
  std::array<std::array<double, 2>, 2> table{{{1.0, 1.0}, {1.0, 1.0}}};
};

/**
 * Potential-function view of the model. Identification: log node potentials
 * sum to zero over outcomes, and each row/column of the log pair tables sums
 * to zero; pairs without an edge carry all-ones tables.
 */
struct PotentialSet {
  std::vector<NodePotential> node_potentials;
  std::vector<PairPotential> pair_potentials;  // all pairs i<j, lexicographic
};

/// Expected contingency-table frequencies N*Pr(x) plus the loglinear
/// intercept nu = ln N - ln Z.
struct LoglinearView {
  Eigen::VectorXd expected_frequency;  // canonical state order
  double nu = 0.0;
};

/// Energy H(x) = -sum_i tau_i x_i - sum_{i<j} omega_ij x_i x_j.
double hamiltonian(const IsingModel& model, const BinaryState& x);

/// Z = sum over all 2^P states of exp(-beta H(x)). Refuses above the cap.
double partition_function(const IsingModel& model, int enumeration_cap = kDefaultEnumerationCap);

/// Pr(X = x) = exp(-beta H(x)) / Z.
double state_probability(const IsingModel& model, const BinaryState& x,
                         int enumeration_cap = kDefaultEnumerationCap);

/// Potentials, probabilities and Z for every state, canonical order.
StateDistribution full_distribution(const IsingModel& model,
                                    int enumeration_cap = kDefaultEnumerationCap);

/**
 * Pr(X_i = +1 | rest). `x_rest` holds the other P-1 node values in ascending
 * node order. Logistic in eta = tau_i + sum_j omega_ij x_j; needs no Z, so it
 * works at any P.
 */
double conditional_node(const IsingModel& model, int i, const Eigen::VectorXd& x_rest);

/// Same conditional, but `x_full` has length P and entry i is ignored.
double conditional_node_full(const IsingModel& model, int i, const Eigen::VectorXd& x_full);

/// Marginal distribution over `keep` (strictly increasing node indices).
StateDistribution marginalize(const StateDistribution& dist, const std::vector<int>& keep);

/**
 * Conditional 2x2 table of (X_k, X_l) given the remaining P-2 node values
 * (ascending node order). Row index: x_k in {-1,+1}; column: x_l.
 * Factorizes into an outer product of its margins iff omega_kl == 0.
 */
Eigen::Matrix2d condition_pair(const IsingModel& model, int k, int l,
                               const Eigen::VectorXd& x_rest);

/// Shannon entropy -sum p ln p of the full distribution (nats).
double entropy(const IsingModel& model, int enumeration_cap = kDefaultEnumerationCap);

/// Potential-function view of the effective parameters (beta*tau, beta*omega).
PotentialSet to_potentials(const IsingModel& model);

/// Inverse of to_potentials; validates positivity and the identification
/// constraints (tolerance 1e-9). Returns a model with beta == 1.
IsingModel from_potentials(const PotentialSet& potentials);

/// Loglinear (homogeneous association) view: E[n(x)] = N Pr(x), nu = ln N - ln Z.
LoglinearView loglinear_view(const IsingModel& model, std::int64_t n_total,
                             int enumeration_cap = kDefaultEnumerationCap);

/// Fixed-order pairwise (binary tree) summation; deterministic and stable.
double pairwise_sum(const double* data, std::size_t n);

namespace detail {
void check_enumeration_cap(int p, int cap);
}

}  // namespace ising
