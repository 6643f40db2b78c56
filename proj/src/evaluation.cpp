#include "lrdpp/evaluation.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>
#include <random>

#include "lrdpp/conditioning.hpp"
#include "lrdpp/error.hpp"
#include "lrdpp/likelihood.hpp"

namespace lrdpp {

std::vector<EvalInstance> make_instances(std::span<const Basket> baskets, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<EvalInstance> instances;
  instances.reserve(baskets.size());
  for (std::size_t n = 0; n < baskets.size(); ++n) {
    const Basket& basket = baskets[n];
    if (basket.size() < 2) {
      throw DataError("test basket " + std::to_string(n) + " has fewer than two items");
    }
    std::uniform_int_distribution<std::size_t> pick(0, basket.size() - 1);
    const std::size_t drop = pick(rng);
    std::vector<ItemIndex> observed;
    observed.reserve(basket.size() - 1);
    for (std::size_t j = 0; j < basket.size(); ++j) {
      if (j != drop) {
        observed.push_back(basket[j]);
      }
    }
    instances.push_back({Basket(std::move(observed)), basket[drop]});
  }
  return instances;
}

std::vector<EvalInstance> make_instances(const BasketDataset& test_set, std::uint64_t seed) {
  return make_instances(test_set.baskets(), seed);
}

Scorer low_rank_scorer(const TraitMatrix& traits) {
  return [traits](const Basket& observed) {
    const ConditionedModel model = condition(traits, observed);
    const std::vector<double> p = next_item_probabilities(model);
    std::vector<double> scores(traits.num_items(), 0.0);
    for (std::size_t r = 0; r < p.size(); ++r) {
      scores[model.candidates()[r]] = p[r];
    }
    return scores;
  };
}

double percentile_rank(std::span<const double> scores, std::size_t held_out) {
  const double target = scores[held_out];
  std::size_t at_or_below = 0;
  for (double s : scores) {
    if (target >= s) {
      ++at_or_below;
    }
  }
  return 100.0 * static_cast<double>(at_or_below) / static_cast<double>(scores.size());
}

std::size_t rank_of(std::span<const double> scores, std::size_t held_out) {
  const double target = scores[held_out];
  std::size_t rank = 1;
  for (std::size_t j = 0; j < scores.size(); ++j) {
    if (scores[j] > target || (scores[j] == target && j < held_out)) {
      ++rank;
    }
  }
  return rank;
}

std::size_t ScoredInstances::num_skipped() const {
  std::size_t total = 0;
  for (const auto& [reason, count] : skipped) {
    total += count;
  }
  return total;
}

ScoredInstances score_instances(std::span<const EvalInstance> instances, std::size_t num_items,
                                const Scorer& scorer) {
  ScoredInstances out;
  out.outcomes.reserve(instances.size());
  std::vector<double> candidate_scores;
  for (const auto& instance : instances) {
    if (instance.held_out >= num_items || instance.observed.contains(instance.held_out)) {
      throw Error("invalid evaluation instance");
    }
    std::vector<double> scores;
    try {
      scores = scorer(instance.observed);
    } catch (const ConditioningError& e) {
      ++out.skipped[e.what()];
      continue;
    }
    if (scores.size() != num_items) {
      throw Error("scorer returned " + std::to_string(scores.size()) + " scores for " +
                  std::to_string(num_items) + " items");
    }
    candidate_scores.clear();
    std::size_t held_pos = 0;
    for (ItemIndex i = 0; i < num_items; ++i) {
      if (instance.observed.contains(i)) {
        continue;
      }
      if (i == instance.held_out) {
        held_pos = candidate_scores.size();
      }
      candidate_scores.push_back(scores[i]);
    }
    out.outcomes.push_back({instance.held_out, percentile_rank(candidate_scores, held_pos),
                            rank_of(candidate_scores, held_pos), candidate_scores.size()});
  }
  return out;
}

namespace {

void require_outcomes(const ScoredInstances& scored) {
  if (scored.outcomes.empty()) {
    throw Error("no evaluation instance could be scored");
  }
}

}  // namespace

double mpr(const ScoredInstances& scored) {
  require_outcomes(scored);
  double sum = 0.0;
  for (const auto& o : scored.outcomes) {
    sum += o.percentile_rank;
  }
  return sum / static_cast<double>(scored.outcomes.size());
}

std::map<std::size_t, double> precision_at_k(const ScoredInstances& scored,
                                             std::span<const std::size_t> ks) {
  require_outcomes(scored);
  std::map<std::size_t, double> out;
  for (std::size_t k : ks) {
    std::size_t hits = 0;
    for (const auto& o : scored.outcomes) {
      hits += o.rank <= k ? 1 : 0;
    }
    out[k] = static_cast<double>(hits) / static_cast<double>(scored.outcomes.size());
  }
  return out;
}

std::map<std::size_t, double> pop_weighted_precision_at_k(const ScoredInstances& scored,
                                                          std::span<const std::size_t> ks,
                                                          std::span<const std::size_t> train_counts,
                                                          double beta) {
  require_outcomes(scored);
  std::vector<double> weights;
  weights.reserve(scored.outcomes.size());
  for (const auto& o : scored.outcomes) {
    if (o.held_out >= train_counts.size()) {
      throw Error("training counts do not cover item " + std::to_string(o.held_out));
    }
    const std::size_t c = train_counts[o.held_out];
    weights.push_back(1.0 / std::pow(c > 0 ? static_cast<double>(c) : kUnseenItemCount, beta));
  }
  std::map<std::size_t, double> out;
  for (std::size_t k : ks) {
    double hit = 0.0;
    double total = 0.0;
    for (std::size_t t = 0; t < weights.size(); ++t) {
      total += weights[t];
      if (scored.outcomes[t].rank <= k) {
        hit += weights[t];
      }
    }
    out[k] = hit / total;
  }
  return out;
}

double mpr(std::span<const EvalInstance> instances, std::size_t num_items, const Scorer& scorer) {
  return mpr(score_instances(instances, num_items, scorer));
}

std::map<std::size_t, double> precision_at_k(std::span<const EvalInstance> instances,
                                             std::size_t num_items, const Scorer& scorer,
                                             std::span<const std::size_t> ks) {
  return precision_at_k(score_instances(instances, num_items, scorer), ks);
}

std::map<std::size_t, double> pop_weighted_precision_at_k(std::span<const EvalInstance> instances,
                                                          std::size_t num_items,
                                                          const Scorer& scorer,
                                                          std::span<const std::size_t> ks,
                                                          std::span<const std::size_t> train_counts,
                                                          double beta) {
  return pop_weighted_precision_at_k(score_instances(instances, num_items, scorer), ks, train_counts,
                                     beta);
}

EvalReport evaluate(std::span<const EvalInstance> instances, std::size_t num_items,
                    const Scorer& scorer, std::span<const std::size_t> ks,
                    std::span<const std::size_t> train_counts, double beta) {
  const ScoredInstances scored = score_instances(instances, num_items, scorer);
  EvalReport report;
  report.beta = beta;
  report.n_instances = scored.outcomes.size();
  report.n_skipped = scored.num_skipped();
  report.skip_reasons = scored.skipped;
  report.mpr = mpr(scored);
  report.precision_at = precision_at_k(scored, ks);
  report.pop_weighted_precision_at = pop_weighted_precision_at_k(scored, ks, train_counts, beta);
  return report;
}

void print_report_table(std::ostream& out, const EvalReport& report) {
  const auto flags = out.flags();
  const auto precision = out.precision();
  out << "instances scored: " << report.n_instances << ", skipped: " << report.n_skipped << '\n';
  for (const auto& [reason, count] : report.skip_reasons) {
    out << "  skipped " << count << ": " << reason << '\n';
  }
  out << std::fixed << std::setprecision(3) << "MPR: " << report.mpr << '\n';
  out << std::setw(6) << "k" << std::setw(14) << "precision" << std::setw(28)
      << ("pop_weighted(beta=" + std::to_string(report.beta).substr(0, 4) + ")") << '\n';
  out << std::setprecision(5);
  for (const auto& [k, p] : report.precision_at) {
    out << std::setw(6) << k << std::setw(14) << p << std::setw(28)
        << report.pop_weighted_precision_at.at(k) << '\n';
  }
  out.flags(flags);
  out.precision(precision);
}

void print_report_values(std::ostream& out, const EvalReport& report) {
  const auto flags = out.flags();
  const auto precision = out.precision();
  out << std::setprecision(17);
  out << "mpr - " << report.mpr << '\n';
  for (const auto& [k, p] : report.precision_at) {
    out << "precision " << k << ' ' << p << '\n';
  }
  for (const auto& [k, p] : report.pop_weighted_precision_at) {
    out << "pop_weighted_precision " << k << ' ' << p << '\n';
  }
  out << "beta - " << report.beta << '\n';
  out << "n_instances - " << report.n_instances << '\n';
  out << "n_skipped - " << report.n_skipped << '\n';
  out.flags(flags);
  out.precision(precision);
}

}  // namespace lrdpp
