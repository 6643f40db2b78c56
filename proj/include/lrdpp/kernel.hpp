#pragma once

#include <cstddef>
#include <limits>
#include <span>

#include <Eigen/Dense>

#include "lrdpp/basket.hpp"

namespace lrdpp {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Relative pivot tolerance below which a Gram matrix is treated as singular.
inline constexpr double kPivotTolerance = 1e-12;

// M x K factor V of the DPP kernel L = V V^T. Row i is the trait vector of
// item i. Entries are always finite.
class TraitMatrix {
public:
  TraitMatrix() = default;
  explicit TraitMatrix(Eigen::MatrixXd values);
  static TraitMatrix zeros(std::size_t num_items, std::size_t num_traits);

  std::size_t num_items() const { return static_cast<std::size_t>(values_.rows()); }
  std::size_t num_traits() const { return static_cast<std::size_t>(values_.cols()); }
  const Eigen::MatrixXd& values() const { return values_; }
  auto row(std::size_t i) const { return values_.row(static_cast<Eigen::Index>(i)); }

  // Rows of the given items, in the given order.
  Eigen::MatrixXd rows(std::span<const ItemIndex> items) const;

  bool operator==(const TraitMatrix& other) const { return values_ == other.values_; }

private:
  Eigen::MatrixXd values_;
};

// log det(V_Y V_Y^T). Returns kNegInf when the Gram matrix is singular to
// working precision. The empty set has log det 0.
double log_det_basket(const TraitMatrix& traits, const Basket& basket);

// Same, for items given in arbitrary order (duplicates give kNegInf).
double log_det_subset(const TraitMatrix& traits, std::span<const ItemIndex> items);

// log det(L + I_M), evaluated as log det(I_K + V^T V).
double log_normalizer(const TraitMatrix& traits);

// log P(Y) = log det(L_Y) - log det(L + I).
double dpp_log_prob(const TraitMatrix& traits, const Basket& basket);

// Same with a precomputed log_normalizer(traits).
double dpp_log_prob(const TraitMatrix& traits, const Basket& basket, double log_norm);

// Pivoted LDL^T of a small symmetric PSD Gram matrix with a relative pivot
// tolerance, used for determinants and solves against basket Gram matrices.
class GramFactor {
public:
  explicit GramFactor(const Eigen::MatrixXd& gram);

  bool singular() const { return singular_; }
  // kNegInf when singular.
  double log_det() const;
  // gram^{-1} * rhs. Only valid when !singular().
  Eigen::MatrixXd solve(const Eigen::MatrixXd& rhs) const;

private:
  Eigen::LDLT<Eigen::MatrixXd> ldlt_;
  bool singular_ = false;
};

}  // namespace lrdpp
