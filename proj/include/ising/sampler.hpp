#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "ising/irt_bridge.hpp"
#include "ising/model.hpp"
#include "ising/rng.hpp"

namespace ising {

struct SamplerConfig {
  enum class Method { exact, gibbs };

  Method method = Method::exact;
  int n_samples = 1;
  int burn_in = 1000;  // gibbs only
  int thin = 1;        // gibbs only
  std::uint64_t seed = 0;
};

/// Scale-free network generator settings; defaults follow the synthetic
/// sparse-network setup (5% extra-connection probability, weights in
/// [0.75, 1], thresholds in [-3, -1]).
struct NetworkGenConfig {
  int p = 10;
  double attach_prob = 0.05;
  double weight_low = 0.75;
  double weight_high = 1.0;
  double thresh_low = -3.0;
  double thresh_high = -1.0;
  std::uint64_t seed = 0;
};

/**
 * Two-factor (or general) multidimensional Rasch generator settings. Factors
 * are standard normal with exchangeable correlation factor_corr; items load
 * with unit discrimination on their assigned factor; difficulties are drawn
 * standard normal unless fixed. fixed_difficulties / fixed_thetas override
 * the random draws (used by tests and for exact reproduction).
 */
struct MirtGenConfig {
  int n = 500;
  int p = 10;
  double factor_corr = 0.5;
  std::vector<int> factor_of_item;  // empty -> first half factor 0, rest factor 1
  std::uint64_t seed = 0;
  std::optional<Eigen::VectorXd> fixed_difficulties;
  std::optional<Eigen::MatrixXd> fixed_thetas;  // n x M
};

struct MirtSample {
  BinaryDataset data;
  MirtModel truth;
  Eigen::MatrixXd thetas;  // n x M draws actually used
};

/// i.i.d. rows by inverse-CDF over the exact state distribution.
BinaryDataset sample_exact(const IsingModel& model, const SamplerConfig& cfg,
                           int enumeration_cap = kDefaultEnumerationCap);

/**
 * Sequential-scan Gibbs sampler: each sweep updates nodes 0..P-1 in order
 * from their full conditionals; the chain starts from a uniform random state,
 * discards burn_in sweeps, then records every thin-th sweep.
 */
BinaryDataset sample_gibbs(const IsingModel& model, const SamplerConfig& cfg);

/**
 * Scale-free Ising model: a preferential-attachment tree skeleton (each new
 * node attaches to one existing node chosen proportional to degree), then
 * every remaining pair is added independently with probability attach_prob.
 * Edge weights ~ U(weight_low, weight_high), thresholds ~ U(thresh_low,
 * thresh_high). Draw order (skeleton, extra pairs in lexicographic order,
 * thresholds, then edge weights in lexicographic order) is fixed.
 */
IsingModel generate_scale_free_model(const NetworkGenConfig& cfg);

/// Dataset from the multidimensional Rasch generator plus the generating
/// parameters. Draw order: difficulties, then per person (thetas, responses).
MirtSample generate_mirt_dataset(const MirtGenConfig& cfg);

}  // namespace ising
