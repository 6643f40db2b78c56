#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lrdpp/data.hpp"
#include "lrdpp/error.hpp"
#include "lrdpp/kernel.hpp"
#include "lrdpp/likelihood.hpp"

namespace lrdpp {

struct TrainConfig {
  std::size_t num_traits = 30;
  double epsilon0 = 1e-5;
  double beta = 0.95;
  // Annealing horizon in iterations; 0 selects ten epochs' worth.
  double anneal_horizon = 0.0;
  double alpha = 1.0;
  std::size_t batch_size = 1000;
  double delta = 1e-5;
  std::size_t max_iters = 10000;
  std::uint64_t seed = 0;
  double init_scale = 0.1;
  unsigned threads = 1;

  // Throws TrainingError on invalid values.
  void validate() const;
  // anneal_horizon with the default resolved for a dataset of `num_baskets`.
  double resolved_horizon(std::size_t num_baskets) const;
  std::size_t iterations_per_epoch(std::size_t num_baskets) const;
};

// eps_t = eps_0 / (1 + t / T)
double learning_rate(std::size_t iteration, double epsilon0, double horizon);

struct NagState {
  Eigen::MatrixXd position;  // V
  Eigen::MatrixXd velocity;  // W
};

// W' = beta W + (1 - beta) eps g,  V' = V + W'
// where g is the gradient at the lookahead point V + beta W.
// Throws TrainingError if the gradient has non-finite entries.
NagState nag_step(const Eigen::MatrixXd& position, const Eigen::MatrixXd& velocity,
                  const Eigen::MatrixXd& lookahead_gradient, double step_size, double beta);

// |f_curr - f_prev| / |f_prev| <= delta. False when f_prev is zero or either
// value is non-finite.
bool converged(double f_prev, double f_curr, double delta);

struct TraceRecord {
  std::size_t epoch = 0;
  std::size_t iteration = 0;  // iterations completed at the end of the epoch
  double learning_rate = 0.0;  // rate used on the epoch's last iteration
  double objective = 0.0;
  std::optional<double> held_out;
};

struct TrainTrace {
  double initial_objective = 0.0;
  std::vector<TraceRecord> epochs;
  bool converged = false;
  std::size_t iterations_run = 0;
};

// Called once per epoch with the current traits, e.g. to score held-out data.
using EpochObserver = std::function<std::optional<double>(const TraitMatrix&)>;

struct TrainResult {
  TraitMatrix traits;
  TrainTrace trace;
};

// Stochastic gradient ascent with Nesterov momentum on the regularized
// log-likelihood. Baskets are shuffled every epoch and consumed in
// consecutive mini-batches; the full objective is evaluated after every epoch
// and training stops when it converges or max_iters is reached.
// Throws TrainingError for baskets larger than num_traits, or if the
// objective becomes non-finite (the partial trace is attached).
TrainResult train(const BasketDataset& dataset, const TrainConfig& config,
                  const EpochObserver& observer = {});

class TrainingAborted : public TrainingError {
public:
  TrainingAborted(const std::string& what, TrainTrace trace)
      : TrainingError(what), trace_(std::move(trace)) {}
  const TrainTrace& trace() const { return trace_; }

private:
  TrainTrace trace_;
};

}  // namespace lrdpp
