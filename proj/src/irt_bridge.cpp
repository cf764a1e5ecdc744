#include "ising/irt_bridge.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace ising {

namespace {

constexpr double kSqrtHalf = 0.70710678118654752440;
constexpr double kInvSqrtPi = 0.56418958354775628695;  // 1/sqrt(pi)

// Symmetric eigendecomposition, eigenvalues descending, deterministic
// eigenvector signs: flip each column so its largest-magnitude entry
// (first one on exact ties) is positive.
void sorted_eigs(const Eigen::MatrixXd& sym, Eigen::VectorXd& values,
                 Eigen::MatrixXd& vectors) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("eigendecomposition failed to converge");
  }
  const int p = static_cast<int>(sym.rows());
  values.resize(p);
  vectors.resize(p, p);
  // Eigen returns ascending order; reverse it.
  for (int j = 0; j < p; ++j) {
    values[j] = solver.eigenvalues()[p - 1 - j];
    vectors.col(j) = solver.eigenvectors().col(p - 1 - j);
  }
  for (int j = 0; j < p; ++j) {
    int arg = 0;
    for (int i = 1; i < p; ++i) {
      if (std::abs(vectors(i, j)) > std::abs(vectors(arg, j))) arg = i;
    }
    if (vectors(arg, j) < 0.0) vectors.col(j) *= -1.0;
  }
}

int effective_dims(const Eigen::MatrixXd& a, std::vector<int>& dims) {
  dims.clear();
  for (int j = 0; j < a.cols(); ++j) {
    if (a.col(j).cwiseAbs().maxCoeff() > 0.0) dims.push_back(j);
  }
  return static_cast<int>(dims.size());
}

}  // namespace

MirtModel::MirtModel(Eigen::MatrixXd a_in, Eigen::VectorXd delta_in)
    : a(std::move(a_in)), delta(std::move(delta_in)) {
  if (a.rows() < 1 || a.cols() < 1) throw std::invalid_argument("MirtModel: P >= 1, M >= 1");
  if (delta.size() != a.rows()) {
    throw std::invalid_argument("MirtModel: delta length must match item count");
  }
  if (!a.allFinite() || !delta.allFinite()) {
    throw std::invalid_argument("MirtModel: parameters must be finite");
  }
}

GaussHermite gauss_hermite(int n) {
  if (n < 1) throw std::invalid_argument("gauss_hermite: n >= 1 required");
  if (n == 1) {
    GaussHermite gh;
    gh.nodes = Eigen::VectorXd::Zero(1);
    gh.weights = Eigen::VectorXd::Constant(1, std::sqrt(M_PI));
    return gh;
  }
  // Jacobi matrix of the Hermite recurrence: off-diagonal sqrt(k/2).
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const double b = std::sqrt(k / 2.0);
    jacobi(k, k - 1) = b;
    jacobi(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("gauss_hermite: eigensolve failed");
  }
  GaussHermite gh;
  gh.nodes = solver.eigenvalues();
  gh.weights.resize(n);
  const double mu0 = std::sqrt(M_PI);  // integral of exp(-t^2)
  for (int k = 0; k < n; ++k) {
    const double v0 = solver.eigenvectors()(0, k);
    gh.weights[k] = mu0 * v0 * v0;
  }
  return gh;
}

std::pair<MirtModel, EigenBridge> ising_to_mirt(const IsingModel& model, double rank_tol) {
  const int p = model.p();
  EigenBridge bridge;
  Eigen::VectorXd raw_values;
  sorted_eigs(model.omega, raw_values, bridge.q);
  // Trace of the zero-diagonal omega is zero, so the smallest eigenvalue is
  // never positive; the shift is always >= 0.
  bridge.shift_c = -raw_values[p - 1];
  bridge.lambda = raw_values.array() + bridge.shift_c;
  const double lead = bridge.lambda[0];
  const double threshold = lead > 0.0 ? rank_tol * lead : 0.0;
  bridge.rank = 0;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(p, p);
  for (int j = 0; j < p; ++j) {
    if (bridge.lambda[j] > threshold && bridge.lambda[j] > 0.0) {
      ++bridge.rank;
      // alpha_ij = -2 sqrt(lambda_j / 2) q_ij with the negative root.
      a.col(j) = 2.0 * std::sqrt(bridge.lambda[j] / 2.0) * bridge.q.col(j);
    } else {
      bridge.lambda[j] = std::max(bridge.lambda[j], 0.0);
    }
  }
  return {MirtModel(std::move(a), -model.tau), bridge};
}

IsingModel mirt_to_ising(const MirtModel& mirt, double /*bridge_shift*/) {
  Eigen::MatrixXd omega = 0.5 * mirt.a * mirt.a.transpose();
  omega.diagonal().setZero();
  omega = ((omega + omega.transpose()) / 2.0).eval();
  return IsingModel(-mirt.delta, std::move(omega));
}

double mirt_conditional(const MirtModel& mirt, const BinaryState& x,
                        const Eigen::VectorXd& theta) {
  if (x.size() != mirt.p()) throw std::invalid_argument("mirt_conditional: bad state length");
  if (theta.size() != mirt.m()) {
    throw std::invalid_argument("mirt_conditional: theta length must equal M");
  }
  double log_prob = 0.0;
  for (int i = 0; i < mirt.p(); ++i) {
    const double linear = mirt.a.row(i).dot(theta) - mirt.delta[i];
    // ln of exp(x*linear) / (exp(linear) + exp(-linear))
    log_prob += x[i] * linear - (std::abs(linear) + std::log1p(std::exp(-2.0 * std::abs(linear))));
  }
  return std::exp(log_prob);
}

namespace {

// Unnormalized quadrature weight of each state: integral over the effective
// latent dimensions of exp(-theta'theta)/sqrt(pi^M) * prod_i exp(x_i(a_i'theta - delta_i)).
Eigen::VectorXd quadrature_state_weights(const MirtModel& mirt, int quadrature_nodes,
                                         int enumeration_cap) {
  const int p = mirt.p();
  detail::check_enumeration_cap(p, enumeration_cap);
  std::vector<int> dims;
  const int m_eff = effective_dims(mirt.a, dims);
  if (m_eff > 3) {
    throw CapExceededError(
        "mirt_marginal: " + std::to_string(m_eff) +
        " nonzero latent dimensions exceed the tensor-quadrature guard of 3; "
        "use the equivalent Ising model's closed form instead");
  }
  const std::uint64_t n_states = std::uint64_t{1} << p;
  Eigen::VectorXd weights = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n_states));

  if (m_eff == 0) {
    for (std::uint64_t s = 0; s < n_states; ++s) {
      double log_w = 0.0;
      for (int i = 0; i < p; ++i) {
        const double xi = (s >> i) & 1 ? 1.0 : -1.0;
        const double lin = -mirt.delta[i];
        log_w += xi * lin - (std::abs(lin) + std::log1p(std::exp(-2.0 * std::abs(lin))));
      }
      weights[static_cast<Eigen::Index>(s)] = std::exp(log_w);
    }
    return weights;
  }

  const GaussHermite gh = gauss_hermite(quadrature_nodes);
  const int n = quadrature_nodes;
  std::vector<int> idx(m_eff, 0);
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(mirt.m());
  Eigen::VectorXd lin(p);
  // Tensor product over the effective dimensions, fixed lexicographic order.
  while (true) {
    double quad_weight = 1.0;
    for (int d = 0; d < m_eff; ++d) {
      theta[dims[d]] = gh.nodes[idx[d]];
      quad_weight *= gh.weights[idx[d]] * kInvSqrtPi;
    }
    for (int i = 0; i < p; ++i) lin[i] = mirt.a.row(i).dot(theta) - mirt.delta[i];
    for (std::uint64_t s = 0; s < n_states; ++s) {
      double log_f = 0.0;
      for (int i = 0; i < p; ++i) log_f += (s >> i) & 1 ? lin[i] : -lin[i];
      weights[static_cast<Eigen::Index>(s)] += quad_weight * std::exp(log_f);
    }
    int d = 0;
    while (d < m_eff && ++idx[d] == n) idx[d++] = 0;
    if (d == m_eff) break;
  }
  return weights;
}

}  // namespace

Eigen::VectorXd mirt_marginal_table(const MirtModel& mirt, int quadrature_nodes,
                                    int enumeration_cap) {
  Eigen::VectorXd weights = quadrature_state_weights(mirt, quadrature_nodes, enumeration_cap);
  const double total = pairwise_sum(weights.data(), static_cast<std::size_t>(weights.size()));
  if (!(total > 0.0) || !std::isfinite(total)) {
    throw std::runtime_error("mirt_marginal: quadrature normalization failed");
  }
  return weights / total;
}

double mirt_marginal(const MirtModel& mirt, const BinaryState& x, int quadrature_nodes,
                     int enumeration_cap) {
  if (x.size() != mirt.p()) throw std::invalid_argument("mirt_marginal: bad state length");
  const Eigen::VectorXd table = mirt_marginal_table(mirt, quadrature_nodes, enumeration_cap);
  return table[static_cast<Eigen::Index>(x.index())];
}

LatentPosterior latent_posterior(const MirtModel& mirt, const BinaryState& x) {
  if (x.size() != mirt.p()) throw std::invalid_argument("latent_posterior: bad state length");
  LatentPosterior post;
  post.mean = 0.5 * mirt.a.transpose() * x.values();
  post.sd = kSqrtHalf;
  return post;
}

namespace {

double normal_pdf(double value, double mean, double sd) {
  const double zscore = (value - mean) / sd;
  return std::exp(-0.5 * zscore * zscore) / (sd * std::sqrt(2.0 * M_PI));
}

}  // namespace

Eigen::VectorXd latent_marginal_density(const MirtModel& mirt, int dim,
                                        const Eigen::VectorXd& grid, int enumeration_cap) {
  if (dim < 0 || dim >= mirt.m()) {
    throw std::invalid_argument("latent_marginal_density: dimension out of range");
  }
  const IsingModel equivalent = mirt_to_ising(mirt);
  const StateDistribution dist = full_distribution(equivalent, enumeration_cap);
  Eigen::VectorXd density = Eigen::VectorXd::Zero(grid.size());
  for (std::uint64_t s = 0; s < dist.size(); ++s) {
    const double prob = dist.probabilities[static_cast<Eigen::Index>(s)];
    double mean = 0.0;
    for (int i = 0; i < mirt.p(); ++i) {
      const double xi = (s >> i) & 1 ? 1.0 : -1.0;
      mean += mirt.a(i, dim) * xi;
    }
    mean *= 0.5;
    for (Eigen::Index g = 0; g < grid.size(); ++g) {
      density[g] += prob * normal_pdf(grid[g], mean, kSqrtHalf);
    }
  }
  return density;
}

double latent_prior_density(const MirtModel& mirt, const Eigen::VectorXd& theta,
                            int enumeration_cap) {
  if (theta.size() != mirt.m()) {
    throw std::invalid_argument("latent_prior_density: theta length must equal M");
  }
  const IsingModel equivalent = mirt_to_ising(mirt);
  const StateDistribution dist = full_distribution(equivalent, enumeration_cap);
  double density = 0.0;
  for (std::uint64_t s = 0; s < dist.size(); ++s) {
    const double prob = dist.probabilities[static_cast<Eigen::Index>(s)];
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(mirt.m());
    for (int i = 0; i < mirt.p(); ++i) {
      const double xi = (s >> i) & 1 ? 1.0 : -1.0;
      mean += mirt.a.row(i).transpose() * xi;
    }
    mean *= 0.5;
    double component = prob;
    for (int j = 0; j < mirt.m(); ++j) {
      component *= normal_pdf(theta[j], mean[j], kSqrtHalf);
    }
    density += component;
  }
  return density;
}

std::pair<int, Eigen::VectorXd> rank_of_network(const IsingModel& model, double rank_tol) {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
  sorted_eigs(model.omega, values, vectors);
  const int p = model.p();
  const double shift = -values[p - 1];
  Eigen::VectorXd shifted = values.array() + shift;
  const double lead = shifted[0];
  const double threshold = lead > 0.0 ? rank_tol * lead : 0.0;
  int rank = 0;
  for (int j = 0; j < p; ++j) {
    if (shifted[j] > threshold && shifted[j] > 0.0) ++rank;
  }
  return {rank, shifted};
}

}  // namespace ising
