#include "lrdpp/likelihood.hpp"

#include <algorithm>
#include <future>
#include <string>

#include "lrdpp/error.hpp"

namespace lrdpp {

RegularizationWeights popularity_weights(std::span<const std::size_t> counts, double alpha) {
  if (!(alpha >= 0.0)) {
    throw KernelError("regularization strength must be nonnegative");
  }
  RegularizationWeights reg;
  reg.alpha = alpha;
  reg.lambda.reserve(counts.size());
  for (std::size_t c : counts) {
    reg.lambda.push_back(1.0 / (c > 0 ? static_cast<double>(c) : kUnseenItemCount));
  }
  return reg;
}

RegularizationWeights popularity_weights(const BasketDataset& dataset, double alpha) {
  return popularity_weights(dataset.counts(), alpha);
}

namespace {

void check_weights(const TraitMatrix& traits, const RegularizationWeights& reg) {
  if (reg.lambda.size() != traits.num_items()) {
    throw KernelError("regularization weights cover " + std::to_string(reg.lambda.size()) +
                      " items, model has " + std::to_string(traits.num_items()));
  }
}

double regularizer(const TraitMatrix& traits, const RegularizationWeights& reg) {
  if (reg.alpha == 0.0) {
    return 0.0;
  }
  const auto& v = traits.values();
  double sum = 0.0;
  for (Eigen::Index i = 0; i < v.rows(); ++i) {
    sum += reg.lambda[static_cast<std::size_t>(i)] * v.row(i).squaredNorm();
  }
  return 0.5 * reg.alpha * sum;
}

// sum over baskets of 2 (V_n V_n^T)^{-1} V_n scattered into rows [n].
Eigen::MatrixXd data_term(const TraitMatrix& traits, std::span<const Basket> baskets,
                          std::size_t offset) {
  Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(traits.values().rows(), traits.values().cols());
  for (std::size_t n = 0; n < baskets.size(); ++n) {
    const Basket& basket = baskets[n];
    if (basket.empty()) {
      continue;
    }
    const Eigen::MatrixXd rows = traits.rows(basket.items());
    GramFactor factor(rows * rows.transpose());
    if (basket.size() > traits.num_traits() || factor.singular()) {
      throw KernelError("basket " + std::to_string(offset + n) +
                        " has a singular Gram matrix (zero probability under the model)");
    }
    const Eigen::MatrixXd contribution = 2.0 * factor.solve(rows);
    for (std::size_t r = 0; r < basket.size(); ++r) {
      grad.row(static_cast<Eigen::Index>(basket[r])) += contribution.row(static_cast<Eigen::Index>(r));
    }
  }
  return grad;
}

}  // namespace

double objective(const TraitMatrix& traits, std::span<const Basket> baskets,
                 const RegularizationWeights& reg) {
  check_weights(traits, reg);
  double sum = 0.0;
  for (const auto& basket : baskets) {
    const double ld = log_det_basket(traits, basket);
    if (ld == kNegInf) {
      return kNegInf;
    }
    sum += ld;
  }
  return sum - static_cast<double>(baskets.size()) * log_normalizer(traits) - regularizer(traits, reg);
}

double objective(const TraitMatrix& traits, const BasketDataset& dataset,
                 const RegularizationWeights& reg) {
  return objective(traits, dataset.baskets(), reg);
}

Eigen::MatrixXd gradient(const TraitMatrix& traits, std::span<const Basket> batch,
                         std::size_t total_baskets, const RegularizationWeights& reg,
                         unsigned threads) {
  check_weights(traits, reg);
  const auto& v = traits.values();

  Eigen::MatrixXd grad;
  const std::size_t workers = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(batch.size(), 1));
  if (workers == 1) {
    grad = data_term(traits, batch, 0);
  } else {
    std::vector<std::future<Eigen::MatrixXd>> parts;
    const std::size_t chunk = (batch.size() + workers - 1) / workers;
    for (std::size_t begin = 0; begin < batch.size(); begin += chunk) {
      const std::size_t len = std::min(chunk, batch.size() - begin);
      parts.push_back(std::async(std::launch::async, data_term, std::cref(traits),
                                 batch.subspan(begin, len), begin));
    }
    grad = Eigen::MatrixXd::Zero(v.rows(), v.cols());
    for (auto& part : parts) {
      grad += part.get();
    }
  }
  if (!batch.empty()) {
    grad *= static_cast<double>(total_baskets) / static_cast<double>(batch.size());
  }

  // d/dV log det(I + V V^T) = 2 B V with B V = V (I_K + V^T V)^{-1}.
  Eigen::MatrixXd inner = Eigen::MatrixXd::Identity(v.cols(), v.cols());
  inner.noalias() += v.transpose() * v;
  const Eigen::MatrixXd bv = inner.llt().solve(v.transpose()).transpose();
  grad.noalias() -= 2.0 * static_cast<double>(total_baskets) * bv;

  if (reg.alpha != 0.0) {
    for (Eigen::Index i = 0; i < v.rows(); ++i) {
      grad.row(i) -= reg.alpha * reg.lambda[static_cast<std::size_t>(i)] * v.row(i);
    }
  }
  return grad;
}

HeldOutLikelihood average_log_likelihood(const TraitMatrix& traits, std::span<const Basket> baskets) {
  HeldOutLikelihood out;
  const double log_norm = log_normalizer(traits);
  double sum = 0.0;
  for (const auto& basket : baskets) {
    const double lp = dpp_log_prob(traits, basket, log_norm);
    if (lp == kNegInf) {
      ++out.zero_probability;
      continue;
    }
    sum += lp;
    ++out.evaluated;
  }
  out.mean = out.evaluated > 0 ? sum / static_cast<double>(out.evaluated) : kNegInf;
  return out;
}

}  // namespace lrdpp
