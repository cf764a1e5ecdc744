#include "ising/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace ising {

namespace {

constexpr double kSymmetryTol = 1e-9;

bool is_plus_minus_one(double v) { return v == 1.0 || v == -1.0; }

}  // namespace

namespace detail {

void check_enumeration_cap(int p, int cap) {
  if (p > cap) {
    throw CapExceededError("exact enumeration over 2^" + std::to_string(p) +
                           " states exceeds the cap of P=" + std::to_string(cap) +
                           "; raise the cap explicitly to force it");
  }
}

}  // namespace detail

BinaryState::BinaryState(Eigen::VectorXd values) : values_(std::move(values)) {
  if (values_.size() == 0) throw std::invalid_argument("BinaryState: empty state");
  for (Eigen::Index i = 0; i < values_.size(); ++i) {
    if (!is_plus_minus_one(values_[i])) {
      throw std::invalid_argument("BinaryState: entry " + std::to_string(i) +
                                  " is not -1 or +1");
    }
  }
}

BinaryState BinaryState::from_index(std::uint64_t index, int p) {
  if (p < 1 || p > 63) throw std::invalid_argument("BinaryState::from_index: bad p");
  if (index >= (std::uint64_t{1} << p)) {
    throw std::invalid_argument("BinaryState::from_index: index out of range");
  }
  Eigen::VectorXd v(p);
  for (int i = 0; i < p; ++i) v[i] = (index >> i) & 1 ? 1.0 : -1.0;
  return BinaryState(std::move(v));
}

std::uint64_t BinaryState::index() const {
  std::uint64_t idx = 0;
  for (int i = 0; i < size(); ++i) {
    if (values_[i] > 0) idx |= std::uint64_t{1} << i;
  }
  return idx;
}

IsingModel::IsingModel(Eigen::VectorXd tau_in, Eigen::MatrixXd omega_in, double beta_in)
    : tau(std::move(tau_in)), omega(std::move(omega_in)), beta(beta_in) {
  const Eigen::Index n = tau.size();
  if (n < 1) throw std::invalid_argument("IsingModel: P >= 1 required");
  if (omega.rows() != n || omega.cols() != n) {
    throw std::invalid_argument("IsingModel: omega must be P x P");
  }
  if (!(beta > 0.0) || !std::isfinite(beta)) {
    throw std::invalid_argument("IsingModel: beta must be positive and finite");
  }
  if (!tau.allFinite() || !omega.allFinite()) {
    throw std::invalid_argument("IsingModel: parameters must be finite");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::abs(omega(i, i)) > kSymmetryTol) {
      throw std::invalid_argument("IsingModel: omega diagonal must be zero");
    }
    for (Eigen::Index j = i + 1; j < n; ++j) {
      if (std::abs(omega(i, j) - omega(j, i)) > kSymmetryTol) {
        throw std::invalid_argument("IsingModel: omega asymmetry at (" +
                                    std::to_string(i) + "," + std::to_string(j) +
                                    ") exceeds 1e-9");
      }
    }
  }
  // Canonicalize: exact symmetry, exactly zero diagonal.
  omega = ((omega + omega.transpose()) / 2.0).eval();
  omega.diagonal().setZero();
}

BinaryDataset::BinaryDataset(Eigen::MatrixXd rows_in, std::vector<std::string> column_names_in)
    : rows(std::move(rows_in)), column_names(std::move(column_names_in)) {
  if (rows.rows() < 1 || rows.cols() < 1) {
    throw std::invalid_argument("BinaryDataset: N >= 1 and P >= 1 required");
  }
  for (Eigen::Index r = 0; r < rows.rows(); ++r) {
    for (Eigen::Index c = 0; c < rows.cols(); ++c) {
      if (!is_plus_minus_one(rows(r, c))) {
        throw std::invalid_argument("BinaryDataset: cell (" + std::to_string(r) + "," +
                                    std::to_string(c) + ") is not -1 or +1");
      }
    }
  }
  if (!column_names.empty() && column_names.size() != static_cast<std::size_t>(rows.cols())) {
    throw std::invalid_argument("BinaryDataset: column_names size mismatch");
  }
}

double pairwise_sum(const double* data, std::size_t n) {
  if (n == 0) return 0.0;
  if (n <= 8) {
    double s = data[0];
    for (std::size_t i = 1; i < n; ++i) s += data[i];
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(data, half) + pairwise_sum(data + half, n - half);
}

double hamiltonian(const IsingModel& model, const BinaryState& x) {
  const int p = model.p();
  if (x.size() != p) {
    throw std::invalid_argument("hamiltonian: state length " + std::to_string(x.size()) +
                                " does not match P=" + std::to_string(p));
  }
  double linear = 0.0;
  for (int i = 0; i < p; ++i) linear += model.tau[i] * x[i];
  double pair = 0.0;
  for (int i = 0; i < p; ++i) {
    for (int j = i + 1; j < p; ++j) pair += model.omega(i, j) * x[i] * x[j];
  }
  return -linear - pair;
}

namespace {

// exp(-beta H) for the state at canonical index s, computed fresh per state
// so results do not depend on enumeration order.
double potential_at_index(const IsingModel& model, std::uint64_t s) {
  const int p = model.p();
  double energy_neg = 0.0;  // tau'x + sum_{i<j} w_ij x_i x_j
  for (int i = 0; i < p; ++i) {
    const double xi = (s >> i) & 1 ? 1.0 : -1.0;
    energy_neg += model.tau[i] * xi;
    for (int j = i + 1; j < p; ++j) {
      const double xj = (s >> j) & 1 ? 1.0 : -1.0;
      energy_neg += model.omega(i, j) * xi * xj;
    }
  }
  return std::exp(model.beta * energy_neg);
}

}  // namespace

StateDistribution full_distribution(const IsingModel& model, int enumeration_cap) {
  detail::check_enumeration_cap(model.p(), enumeration_cap);
  StateDistribution dist;
  dist.p = model.p();
  const std::uint64_t n_states = std::uint64_t{1} << model.p();
  dist.potentials.resize(static_cast<Eigen::Index>(n_states));
  for (std::uint64_t s = 0; s < n_states; ++s) {
    dist.potentials[static_cast<Eigen::Index>(s)] = potential_at_index(model, s);
  }
  dist.z = pairwise_sum(dist.potentials.data(), n_states);
  if (!(dist.z > 0.0) || !std::isfinite(dist.z)) {
    throw std::runtime_error("full_distribution: partition function overflowed or vanished");
  }
  dist.probabilities = dist.potentials / dist.z;
  return dist;
}

double partition_function(const IsingModel& model, int enumeration_cap) {
  detail::check_enumeration_cap(model.p(), enumeration_cap);
  const std::uint64_t n_states = std::uint64_t{1} << model.p();
  Eigen::VectorXd pots(static_cast<Eigen::Index>(n_states));
  for (std::uint64_t s = 0; s < n_states; ++s) {
    pots[static_cast<Eigen::Index>(s)] = potential_at_index(model, s);
  }
  const double z = pairwise_sum(pots.data(), n_states);
  if (!(z > 0.0) || !std::isfinite(z)) {
    throw std::runtime_error("partition_function: overflow or underflow");
  }
  return z;
}

double state_probability(const IsingModel& model, const BinaryState& x, int enumeration_cap) {
  if (x.size() != model.p()) {
    throw std::invalid_argument("state_probability: dimension mismatch");
  }
  return std::exp(-model.beta * hamiltonian(model, x)) / partition_function(model, enumeration_cap);
}

double conditional_node_full(const IsingModel& model, int i, const Eigen::VectorXd& x_full) {
  const int p = model.p();
  if (i < 0 || i >= p) throw std::invalid_argument("conditional_node: node index out of range");
  if (x_full.size() != p) throw std::invalid_argument("conditional_node: bad state length");
  double eta = model.tau[i];
  for (int j = 0; j < p; ++j) {
    if (j != i) eta += model.omega(i, j) * x_full[j];
  }
  // exp(eta) / (exp(eta) + exp(-eta)), stable for |eta| large.
  return 0.5 * (1.0 + std::tanh(model.beta * eta));
}

double conditional_node(const IsingModel& model, int i, const Eigen::VectorXd& x_rest) {
  const int p = model.p();
  if (i < 0 || i >= p) throw std::invalid_argument("conditional_node: node index out of range");
  if (x_rest.size() != p - 1) {
    throw std::invalid_argument("conditional_node: x_rest must have P-1 entries");
  }
  Eigen::VectorXd full(p);
  int k = 0;
  for (int j = 0; j < p; ++j) full[j] = (j == i) ? 1.0 : x_rest[k++];
  for (int j = 0; j < p; ++j) {
    if (j != i && !is_plus_minus_one(full[j])) {
      throw std::invalid_argument("conditional_node: x_rest entries must be -1 or +1");
    }
  }
  return conditional_node_full(model, i, full);
}

StateDistribution marginalize(const StateDistribution& dist, const std::vector<int>& keep) {
  if (keep.empty()) throw std::invalid_argument("marginalize: keep set must be nonempty");
  for (std::size_t k = 0; k < keep.size(); ++k) {
    if (keep[k] < 0 || keep[k] >= dist.p) {
      throw std::invalid_argument("marginalize: node index out of range");
    }
    if (k > 0 && keep[k] <= keep[k - 1]) {
      throw std::invalid_argument("marginalize: keep must be strictly increasing");
    }
  }
  if (static_cast<int>(keep.size()) == dist.p) return dist;  // identity

  StateDistribution out;
  out.p = static_cast<int>(keep.size());
  const std::uint64_t n_out = std::uint64_t{1} << out.p;
  out.probabilities = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n_out));
  for (std::uint64_t s = 0; s < dist.size(); ++s) {
    std::uint64_t t = 0;
    for (std::size_t k = 0; k < keep.size(); ++k) {
      if ((s >> keep[k]) & 1) t |= std::uint64_t{1} << k;
    }
    out.probabilities[static_cast<Eigen::Index>(t)] +=
        dist.probabilities[static_cast<Eigen::Index>(s)];
  }
  out.potentials = out.probabilities;
  out.z = 1.0;
  return out;
}

Eigen::Matrix2d condition_pair(const IsingModel& model, int k, int l,
                               const Eigen::VectorXd& x_rest) {
  const int p = model.p();
  if (k < 0 || k >= p || l < 0 || l >= p) {
    throw std::invalid_argument("condition_pair: node index out of range");
  }
  if (k == l) throw std::invalid_argument("condition_pair: k and l must differ");
  if (x_rest.size() != p - 2) {
    throw std::invalid_argument("condition_pair: x_rest must have P-2 entries");
  }
  Eigen::VectorXd full(p);
  int pos = 0;
  for (int j = 0; j < p; ++j) {
    if (j == k || j == l) {
      full[j] = 1.0;
    } else {
      if (!is_plus_minus_one(x_rest[pos])) {
        throw std::invalid_argument("condition_pair: x_rest entries must be -1 or +1");
      }
      full[j] = x_rest[pos++];
    }
  }
  Eigen::Matrix2d table;
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      full[k] = a == 0 ? -1.0 : 1.0;
      full[l] = b == 0 ? -1.0 : 1.0;
      table(a, b) = std::exp(-model.beta * hamiltonian(model, BinaryState(full)));
    }
  }
  table /= table.sum();
  return table;
}

double entropy(const IsingModel& model, int enumeration_cap) {
  const StateDistribution dist = full_distribution(model, enumeration_cap);
  double h = 0.0;
  for (Eigen::Index s = 0; s < dist.probabilities.size(); ++s) {
    const double prob = dist.probabilities[s];
    if (prob > 0.0) h -= prob * std::log(prob);
  }
  return h;
}

PotentialSet to_potentials(const IsingModel& model) {
  PotentialSet out;
  const int p = model.p();
  out.node_potentials.reserve(p);
  for (int i = 0; i < p; ++i) {
    const double t = model.beta * model.tau[i];
    out.node_potentials.push_back({std::exp(-t), std::exp(t)});
  }
  for (int i = 0; i < p; ++i) {
    for (int j = i + 1; j < p; ++j) {
      PairPotential pp;
      pp.i = i;
      pp.j = j;
      const double w = model.beta * model.omega(i, j);
      pp.table[0][0] = std::exp(w);
      pp.table[0][1] = std::exp(-w);
      pp.table[1][0] = std::exp(-w);
      pp.table[1][1] = std::exp(w);
      out.pair_potentials.push_back(pp);
    }
  }
  return out;
}

IsingModel from_potentials(const PotentialSet& potentials) {
  constexpr double kConstraintTol = 1e-9;
  const int p = static_cast<int>(potentials.node_potentials.size());
  if (p < 1) throw std::invalid_argument("from_potentials: no node potentials");
  Eigen::VectorXd tau(p);
  for (int i = 0; i < p; ++i) {
    const auto& np = potentials.node_potentials[i];
    if (!(np.at_minus > 0.0) || !(np.at_plus > 0.0)) {
      throw std::invalid_argument("from_potentials: node potentials must be positive");
    }
    const double lm = std::log(np.at_minus);
    const double lp = std::log(np.at_plus);
    if (std::abs(lm + lp) > kConstraintTol) {
      throw std::invalid_argument("from_potentials: node " + std::to_string(i) +
                                  " violates the log-sum-zero identification constraint");
    }
    tau[i] = lp;
  }
  Eigen::MatrixXd omega = Eigen::MatrixXd::Zero(p, p);
  const std::size_t expected_pairs = static_cast<std::size_t>(p) * (p - 1) / 2;
  if (potentials.pair_potentials.size() != expected_pairs) {
    throw std::invalid_argument("from_potentials: expected one table per unordered pair");
  }
  for (const auto& pp : potentials.pair_potentials) {
    if (pp.i < 0 || pp.j <= pp.i || pp.j >= p) {
      throw std::invalid_argument("from_potentials: bad pair indices");
    }
    double lt[2][2];
    for (int a = 0; a < 2; ++a) {
      for (int b = 0; b < 2; ++b) {
        if (!(pp.table[a][b] > 0.0)) {
          throw std::invalid_argument("from_potentials: pair potentials must be positive");
        }
        lt[a][b] = std::log(pp.table[a][b]);
      }
    }
    // Rows and columns of the log table must sum to zero; this forces the
    // table into the form exp(w * x_i * x_j).
    for (int a = 0; a < 2; ++a) {
      if (std::abs(lt[a][0] + lt[a][1]) > kConstraintTol ||
          std::abs(lt[0][a] + lt[1][a]) > kConstraintTol) {
        throw std::invalid_argument("from_potentials: pair (" + std::to_string(pp.i) + "," +
                                    std::to_string(pp.j) +
                                    ") violates the identification constraints");
      }
    }
    omega(pp.i, pp.j) = omega(pp.j, pp.i) = lt[1][1];
  }
  return IsingModel(std::move(tau), std::move(omega), 1.0);
}

LoglinearView loglinear_view(const IsingModel& model, std::int64_t n_total,
                             int enumeration_cap) {
  if (n_total < 1) throw std::invalid_argument("loglinear_view: n_total must be >= 1");
  const StateDistribution dist = full_distribution(model, enumeration_cap);
  LoglinearView view;
  view.expected_frequency = static_cast<double>(n_total) * dist.probabilities;
  view.nu = std::log(static_cast<double>(n_total)) - std::log(dist.z);
  return view;
}

}  // namespace ising
