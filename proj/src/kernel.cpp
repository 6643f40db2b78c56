#include "lrdpp/kernel.hpp"

#include <cmath>
#include <string>

#include "lrdpp/error.hpp"

namespace lrdpp {

TraitMatrix::TraitMatrix(Eigen::MatrixXd values) : values_(std::move(values)) {
  if (values_.cols() < 1 || values_.rows() < 1) {
    throw KernelError("trait matrix needs at least one item and one trait");
  }
  if (!values_.allFinite()) {
    throw KernelError("trait matrix has non-finite entries");
  }
}

TraitMatrix TraitMatrix::zeros(std::size_t num_items, std::size_t num_traits) {
  return TraitMatrix(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(num_items),
                                           static_cast<Eigen::Index>(num_traits)));
}

Eigen::MatrixXd TraitMatrix::rows(std::span<const ItemIndex> items) const {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(items.size()), values_.cols());
  for (std::size_t r = 0; r < items.size(); ++r) {
    if (items[r] >= num_items()) {
      throw KernelError("item index " + std::to_string(items[r]) + " out of range for " +
                        std::to_string(num_items()) + " items");
    }
    out.row(static_cast<Eigen::Index>(r)) = values_.row(static_cast<Eigen::Index>(items[r]));
  }
  return out;
}

GramFactor::GramFactor(const Eigen::MatrixXd& gram) {
  if (gram.rows() == 0) {
    return;
  }
  ldlt_.compute(gram);
  const double scale = gram.diagonal().maxCoeff();
  if (!(scale > 0.0) || ldlt_.info() != Eigen::Success) {
    singular_ = true;
    return;
  }
  const auto d = ldlt_.vectorD();
  singular_ = (d.array() <= kPivotTolerance * scale).any();
}

double GramFactor::log_det() const {
  if (singular_) {
    return kNegInf;
  }
  if (ldlt_.rows() == 0) {
    return 0.0;
  }
  return ldlt_.vectorD().array().log().sum();
}

Eigen::MatrixXd GramFactor::solve(const Eigen::MatrixXd& rhs) const {
  if (ldlt_.rows() == 0) {
    return rhs;
  }
  return ldlt_.solve(rhs);
}

double log_det_subset(const TraitMatrix& traits, std::span<const ItemIndex> items) {
  if (items.empty()) {
    return 0.0;
  }
  const Eigen::MatrixXd rows = traits.rows(items);
  if (items.size() > traits.num_traits()) {
    return kNegInf;
  }
  return GramFactor(rows * rows.transpose()).log_det();
}

double log_det_basket(const TraitMatrix& traits, const Basket& basket) {
  return log_det_subset(traits, basket.items());
}

double log_normalizer(const TraitMatrix& traits) {
  const auto& v = traits.values();
  Eigen::MatrixXd inner = Eigen::MatrixXd::Identity(v.cols(), v.cols());
  inner.selfadjointView<Eigen::Lower>().rankUpdate(v.transpose());
  Eigen::LLT<Eigen::MatrixXd> llt(inner.selfadjointView<Eigen::Lower>());
  if (llt.info() != Eigen::Success) {
    throw KernelError("I + V^T V is not positive definite");
  }
  return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

double dpp_log_prob(const TraitMatrix& traits, const Basket& basket, double log_norm) {
  const double ld = log_det_basket(traits, basket);
  if (ld == kNegInf) {
    return kNegInf;
  }
  return ld - log_norm;
}

double dpp_log_prob(const TraitMatrix& traits, const Basket& basket) {
  return dpp_log_prob(traits, basket, log_normalizer(traits));
}

}  // namespace lrdpp
