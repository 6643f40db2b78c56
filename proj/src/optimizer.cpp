#include "lrdpp/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "lrdpp/error.hpp"

namespace lrdpp {

void TrainConfig::validate() const {
  auto fail = [](const std::string& what) { throw TrainingError("invalid training config: " + what); };
  if (num_traits < 1) fail("K must be at least 1");
  if (!(epsilon0 > 0.0)) fail("epsilon0 must be positive");
  if (!(beta >= 0.0 && beta <= 1.0)) fail("beta must lie in [0, 1]");
  if (!(anneal_horizon >= 0.0)) fail("annealing horizon must be nonnegative");
  if (!(alpha >= 0.0)) fail("alpha must be nonnegative");
  if (batch_size < 1) fail("batch size must be at least 1");
  if (!(delta > 0.0)) fail("delta must be positive");
  if (max_iters < 1) fail("max iterations must be at least 1");
  if (!(init_scale > 0.0)) fail("init scale must be positive");
  if (threads < 1) fail("threads must be at least 1");
}

std::size_t TrainConfig::iterations_per_epoch(std::size_t num_baskets) const {
  return std::max<std::size_t>(1, (num_baskets + batch_size - 1) / batch_size);
}

double TrainConfig::resolved_horizon(std::size_t num_baskets) const {
  if (anneal_horizon > 0.0) {
    return anneal_horizon;
  }
  return 10.0 * static_cast<double>(iterations_per_epoch(num_baskets));
}

double learning_rate(std::size_t iteration, double epsilon0, double horizon) {
  return epsilon0 / (1.0 + static_cast<double>(iteration) / horizon);
}

NagState nag_step(const Eigen::MatrixXd& position, const Eigen::MatrixXd& velocity,
                  const Eigen::MatrixXd& lookahead_gradient, double step_size, double beta) {
  if (position.rows() != velocity.rows() || position.cols() != velocity.cols() ||
      position.rows() != lookahead_gradient.rows() || position.cols() != lookahead_gradient.cols()) {
    throw TrainingError("nag_step: shape mismatch");
  }
  if (!lookahead_gradient.allFinite()) {
    throw TrainingError("non-finite gradient");
  }
  NagState next;
  next.velocity = beta * velocity + ((1.0 - beta) * step_size) * lookahead_gradient;
  next.position = position + next.velocity;
  return next;
}

bool converged(double f_prev, double f_curr, double delta) {
  if (f_prev == 0.0 || !std::isfinite(f_prev) || !std::isfinite(f_curr)) {
    return false;
  }
  return std::abs(f_curr - f_prev) / std::abs(f_prev) <= delta;
}

namespace {

void reject_oversized(const BasketDataset& dataset, std::size_t num_traits) {
  std::vector<std::size_t> offending;
  for (std::size_t n = 0; n < dataset.size(); ++n) {
    if (dataset.basket(n).size() > num_traits) {
      offending.push_back(n);
    }
  }
  if (offending.empty()) {
    return;
  }
  std::size_t largest = 0;
  for (std::size_t n : offending) {
    largest = std::max(largest, dataset.basket(n).size());
  }
  std::ostringstream msg;
  msg << offending.size() << " training basket(s) have more than K = " << num_traits
      << " items and zero probability under a rank-" << num_traits << " kernel (largest has "
      << largest << " items; use K >= " << largest << "). Offending baskets:";
  const std::size_t shown = std::min<std::size_t>(offending.size(), 20);
  for (std::size_t j = 0; j < shown; ++j) {
    msg << ' ' << offending[j];
  }
  if (shown < offending.size()) {
    msg << " ...";
  }
  throw TrainingError(msg.str());
}

}  // namespace

TrainResult train(const BasketDataset& dataset, const TrainConfig& config,
                  const EpochObserver& observer) {
  config.validate();
  if (dataset.empty()) {
    throw TrainingError("training dataset is empty");
  }
  reject_oversized(dataset, config.num_traits);

  const auto m = static_cast<Eigen::Index>(dataset.num_items());
  const auto k = static_cast<Eigen::Index>(config.num_traits);
  const std::size_t n_total = dataset.size();
  const double horizon = config.resolved_horizon(n_total);
  const RegularizationWeights reg = popularity_weights(dataset, config.alpha);

  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> normal(0.0, config.init_scale);
  Eigen::MatrixXd position(m, k);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < k; ++j) {
      position(i, j) = normal(rng);
    }
  }
  Eigen::MatrixXd velocity = Eigen::MatrixXd::Zero(m, k);

  TrainTrace trace;
  double f_prev = objective(TraitMatrix(position), dataset, reg);
  trace.initial_objective = f_prev;
  if (!std::isfinite(f_prev)) {
    throw TrainingAborted("initial objective is not finite", trace);
  }

  std::vector<std::size_t> order(n_total);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<Basket> shuffled(n_total);

  std::size_t t = 0;
  for (std::size_t epoch = 1; t < config.max_iters; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t r = 0; r < n_total; ++r) {
      shuffled[r] = dataset.basket(order[r]);
    }
    const std::span<const Basket> all(shuffled);

    double lr = 0.0;
    for (std::size_t pos = 0; pos < n_total && t < config.max_iters; pos += config.batch_size) {
      const auto batch = all.subspan(pos, std::min(config.batch_size, n_total - pos));
      lr = learning_rate(t, config.epsilon0, horizon);
      try {
        const TraitMatrix lookahead(position + config.beta * velocity);
        const Eigen::MatrixXd grad = gradient(lookahead, batch, n_total, reg, config.threads);
        NagState next = nag_step(position, velocity, grad, lr, config.beta);
        position = std::move(next.position);
        velocity = std::move(next.velocity);
      } catch (const Error& e) {
        trace.iterations_run = t;
        throw TrainingAborted("iteration " + std::to_string(t) + ": " + e.what(), trace);
      }
      ++t;
    }
    trace.iterations_run = t;

    TraitMatrix current(position);
    TraceRecord record;
    record.epoch = epoch;
    record.iteration = t;
    record.learning_rate = lr;
    record.objective = objective(current, dataset, reg);
    if (observer) {
      record.held_out = observer(current);
    }
    trace.epochs.push_back(record);
    if (!std::isfinite(record.objective)) {
      throw TrainingAborted("objective became non-finite after epoch " + std::to_string(epoch), trace);
    }
    if (converged(f_prev, record.objective, config.delta)) {
      trace.converged = true;
      break;
    }
    f_prev = record.objective;
  }
  return {TraitMatrix(std::move(position)), std::move(trace)};
}

}  // namespace lrdpp
