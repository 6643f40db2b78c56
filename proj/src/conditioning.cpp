#include "lrdpp/conditioning.hpp"

#include <algorithm>
#include <string>

#include "lrdpp/error.hpp"

namespace lrdpp {

Eigen::MatrixXd projection(const TraitMatrix& traits, const Basket& basket) {
  const auto k = static_cast<Eigen::Index>(traits.num_traits());
  Eigen::MatrixXd z = Eigen::MatrixXd::Identity(k, k);
  if (basket.empty()) {
    return z;
  }
  const Eigen::MatrixXd rows = traits.rows(basket.items());
  GramFactor factor(rows * rows.transpose());
  if (basket.size() > traits.num_traits() || factor.singular()) {
    throw ConditioningError("conditioning on zero-probability basket");
  }
  z.noalias() -= rows.transpose() * factor.solve(rows);
  // Z is symmetric; drop the rounding asymmetry of the product.
  return 0.5 * (z + z.transpose());
}

ConditionedModel::ConditionedModel(Eigen::MatrixXd conditioned, std::vector<ItemIndex> candidates,
                                   Basket basket, double reference_e1)
    : conditioned_(std::move(conditioned)),
      candidates_(std::move(candidates)),
      basket_(std::move(basket)),
      normalizer_e1_(conditioned_.squaredNorm()),
      reference_e1_(reference_e1 < 0.0 ? normalizer_e1_ : reference_e1) {
  if (static_cast<std::size_t>(conditioned_.rows()) != candidates_.size()) {
    throw ConditioningError("conditioned traits and candidate list disagree in size");
  }
}

bool ConditionedModel::has_mass() const {
  return normalizer_e1_ > 0.0 && normalizer_e1_ > kPivotTolerance * reference_e1_;
}

ConditionedModel condition(const TraitMatrix& traits, const Basket& basket) {
  const Eigen::MatrixXd z = projection(traits, basket);
  std::vector<ItemIndex> candidates;
  candidates.reserve(traits.num_items() - basket.size());
  for (ItemIndex i = 0; i < traits.num_items(); ++i) {
    if (!basket.contains(i)) {
      candidates.push_back(i);
    }
  }
  Eigen::MatrixXd conditioned = traits.rows(candidates);
  const double reference_e1 = conditioned.squaredNorm();
  if (!basket.empty()) {
    conditioned = conditioned * z;
  }
  return ConditionedModel(std::move(conditioned), std::move(candidates), basket, reference_e1);
}

std::vector<double> next_item_probabilities(const ConditionedModel& model) {
  const double e1 = model.normalizer_e1();
  if (!model.has_mass()) {
    throw ConditioningError("no probability mass remains");
  }
  const Eigen::VectorXd diag = model.conditioned_traits().rowwise().squaredNorm();
  std::vector<double> p(static_cast<std::size_t>(diag.size()));
  for (Eigen::Index r = 0; r < diag.size(); ++r) {
    p[static_cast<std::size_t>(r)] = diag(r) / e1;
  }
  return p;
}

double elementary_symmetric(std::span<const double> values, std::size_t k) {
  if (k > values.size()) {
    return 0.0;
  }
  // e[j] holds e_j of the values consumed so far; update from high j down.
  std::vector<double> e(k + 1, 0.0);
  e[0] = 1.0;
  for (std::size_t n = 0; n < values.size(); ++n) {
    const std::size_t top = std::min(k, n + 1);
    for (std::size_t j = top; j >= 1; --j) {
      e[j] += values[n] * e[j - 1];
    }
  }
  return e[k];
}

void sort_by_probability(std::vector<ScoredItem>& items) {
  std::sort(items.begin(), items.end(), [](const ScoredItem& a, const ScoredItem& b) {
    if (a.probability != b.probability) {
      return a.probability > b.probability;
    }
    return a.item < b.item;
  });
}

std::vector<ScoredItem> complete_basket(const TraitMatrix& traits, const Basket& basket,
                                        std::size_t top_n) {
  if (basket.size() >= traits.num_items()) {
    throw ConditioningError("no candidates: the basket covers the whole catalog");
  }
  const ConditionedModel model = condition(traits, basket);
  const std::vector<double> p = next_item_probabilities(model);
  std::vector<ScoredItem> ranked;
  ranked.reserve(p.size());
  for (std::size_t r = 0; r < p.size(); ++r) {
    ranked.push_back({model.candidates()[r], p[r]});
  }
  sort_by_probability(ranked);
  if (ranked.size() > top_n) {
    ranked.resize(top_n);
  }
  return ranked;
}

}  // namespace lrdpp
