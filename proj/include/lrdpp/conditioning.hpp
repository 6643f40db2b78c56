#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "lrdpp/basket.hpp"
#include "lrdpp/kernel.hpp"

namespace lrdpp {

// K x K projection onto the orthogonal complement of the row space of V_A:
//   Z = I - V_A^T (V_A V_A^T)^{-1} V_A.
// Throws ConditioningError if V_A V_A^T is singular.
Eigen::MatrixXd projection(const TraitMatrix& traits, const Basket& basket);

// Low-rank factor of the DPP conditioned on containing `basket`:
// L^A = V^A (V^A)^T with V^A = V_{not A} Z. Immutable once built.
class ConditionedModel {
public:
  // `reference_e1` is the candidates' trace before projection; a conditioned
  // trace below kPivotTolerance times it counts as zero. Defaults to the
  // conditioned trace itself.
  ConditionedModel(Eigen::MatrixXd conditioned, std::vector<ItemIndex> candidates, Basket basket,
                   double reference_e1 = -1.0);

  const Eigen::MatrixXd& conditioned_traits() const { return conditioned_; }
  // candidates()[r] is the catalog index of row r of conditioned_traits().
  std::span<const ItemIndex> candidates() const { return candidates_; }
  const Basket& basket() const { return basket_; }
  // trace(L^A) = e_1 of its eigenvalues.
  double normalizer_e1() const { return normalizer_e1_; }
  // False when the conditioned kernel vanishes to working precision.
  bool has_mass() const;

private:
  Eigen::MatrixXd conditioned_;
  std::vector<ItemIndex> candidates_;
  Basket basket_;
  double normalizer_e1_;
  double reference_e1_;
};

ConditionedModel condition(const TraitMatrix& traits, const Basket& basket);

// P(next item = b | basket) = L^A_bb / e_1(L^A), one entry per candidate row.
// Throws ConditioningError when no probability mass remains.
std::vector<double> next_item_probabilities(const ConditionedModel& model);

// k-th elementary symmetric polynomial of `values` (e_0 = 1, e_k = 0 for k > n).
double elementary_symmetric(std::span<const double> values, std::size_t k);

struct ScoredItem {
  ItemIndex item;
  double probability;
};

// Candidates ordered by descending probability (ties by ascending index),
// truncated to top_n. Throws ConditioningError if the basket covers the
// whole catalog.
std::vector<ScoredItem> complete_basket(const TraitMatrix& traits, const Basket& basket,
                                        std::size_t top_n);

// Orders (item, probability) pairs by the ranking rule used throughout.
void sort_by_probability(std::vector<ScoredItem>& items);

}  // namespace lrdpp
