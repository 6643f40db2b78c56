#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "lrdpp/basket.hpp"
#include "lrdpp/data.hpp"
#include "lrdpp/kernel.hpp"

namespace lrdpp {

// Pseudo-count used in place of C(i) = 0.
inline constexpr double kUnseenItemCount = 0.5;

struct RegularizationWeights {
  std::vector<double> lambda;  // per-item weight, 1 / C(i)
  double alpha = 1.0;
};

// lambda_i = 1 / C(i), or 1 / kUnseenItemCount for items absent from training.
RegularizationWeights popularity_weights(std::span<const std::size_t> counts, double alpha = 1.0);
RegularizationWeights popularity_weights(const BasketDataset& dataset, double alpha = 1.0);

// Regularized log-likelihood
//   sum_n log det(L_[n]) - N log det(L + I) - alpha/2 sum_i lambda_i |v_i|^2.
// kNegInf as soon as one basket has zero probability.
double objective(const TraitMatrix& traits, const BasketDataset& dataset,
                 const RegularizationWeights& reg);
double objective(const TraitMatrix& traits, std::span<const Basket> baskets,
                 const RegularizationWeights& reg);

// Gradient of `objective` with respect to V, estimated from a mini-batch.
// The data term is summed over `batch` and scaled by total_baskets/|batch|;
// the normalizer term carries the factor total_baskets; the regularizer is
// applied once at full strength. With threads > 1 the batch is partitioned
// across workers and the partial sums are added in worker order.
// Throws KernelError if a batch basket has a singular Gram matrix.
Eigen::MatrixXd gradient(const TraitMatrix& traits, std::span<const Basket> batch,
                         std::size_t total_baskets, const RegularizationWeights& reg,
                         unsigned threads = 1);

// Mean of log P(A_n) over the baskets, plus how many have zero probability
// (those are excluded from the mean).
struct HeldOutLikelihood {
  double mean = 0.0;
  std::size_t evaluated = 0;
  std::size_t zero_probability = 0;
};
HeldOutLikelihood average_log_likelihood(const TraitMatrix& traits, std::span<const Basket> baskets);

}  // namespace lrdpp
