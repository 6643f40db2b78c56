#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "lrdpp/basket.hpp"
#include "lrdpp/data.hpp"
#include "lrdpp/kernel.hpp"

namespace lrdpp {

// A test basket with one item held out: observed = Y_n \ {held_out}.
struct EvalInstance {
  Basket observed;
  ItemIndex held_out;
};

// One instance per basket (baskets need at least two items); the held-out
// item is drawn uniformly.
std::vector<EvalInstance> make_instances(std::span<const Basket> baskets, std::uint64_t seed);
std::vector<EvalInstance> make_instances(const BasketDataset& test_set, std::uint64_t seed);

// Scores every catalog item given the observed basket; entries for observed
// items are ignored. May throw ConditioningError, which marks the instance as
// skipped.
using Scorer = std::function<std::vector<double>(const Basket& observed)>;

// Next-item probabilities under the low-rank model.
Scorer low_rank_scorer(const TraitMatrix& traits);

// 100 * |{j' in C : p_j >= p_j'}| / |C|. `scores` holds one entry per
// candidate and `held_out` indexes into it.
double percentile_rank(std::span<const double> scores, std::size_t held_out);

// 1-based position of `held_out` when candidates are sorted by descending
// score with ties broken by ascending position.
std::size_t rank_of(std::span<const double> scores, std::size_t held_out);

struct InstanceOutcome {
  ItemIndex held_out;
  double percentile_rank;
  std::size_t rank;
  std::size_t num_candidates;
};

struct ScoredInstances {
  std::vector<InstanceOutcome> outcomes;
  std::map<std::string, std::size_t> skipped;  // reason -> count

  std::size_t num_skipped() const;
};

ScoredInstances score_instances(std::span<const EvalInstance> instances, std::size_t num_items,
                                const Scorer& scorer);

inline constexpr double kDefaultPopularityExponent = 0.5;

struct EvalReport {
  double mpr = 0.0;
  std::map<std::size_t, double> precision_at;
  std::map<std::size_t, double> pop_weighted_precision_at;
  double beta = kDefaultPopularityExponent;
  std::size_t n_instances = 0;
  std::size_t n_skipped = 0;
  std::map<std::string, std::size_t> skip_reasons;
};

// Metrics over already-scored instances. Throws Error when nothing was scored.
double mpr(const ScoredInstances& scored);
std::map<std::size_t, double> precision_at_k(const ScoredInstances& scored,
                                             std::span<const std::size_t> ks);
// Weights w_t proportional to 1 / C(t)^beta from training counts; an unseen
// item uses kUnseenItemCount.
std::map<std::size_t, double> pop_weighted_precision_at_k(const ScoredInstances& scored,
                                                          std::span<const std::size_t> ks,
                                                          std::span<const std::size_t> train_counts,
                                                          double beta);

double mpr(std::span<const EvalInstance> instances, std::size_t num_items, const Scorer& scorer);
std::map<std::size_t, double> precision_at_k(std::span<const EvalInstance> instances,
                                             std::size_t num_items, const Scorer& scorer,
                                             std::span<const std::size_t> ks);
std::map<std::size_t, double> pop_weighted_precision_at_k(std::span<const EvalInstance> instances,
                                                          std::size_t num_items,
                                                          const Scorer& scorer,
                                                          std::span<const std::size_t> ks,
                                                          std::span<const std::size_t> train_counts,
                                                          double beta);

EvalReport evaluate(std::span<const EvalInstance> instances, std::size_t num_items,
                    const Scorer& scorer, std::span<const std::size_t> ks,
                    std::span<const std::size_t> train_counts,
                    double beta = kDefaultPopularityExponent);

// Aligned table for people.
void print_report_table(std::ostream& out, const EvalReport& report);
// One "<name> <k> <value>" line per metric; k is "-" for scalar metrics.
void print_report_values(std::ostream& out, const EvalReport& report);

}  // namespace lrdpp
