#include "lrdpp/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>

#include "lrdpp/error.hpp"

namespace lrdpp::oracle {

namespace {

double magnitude(const Eigen::MatrixXd& m) {
  return m.size() == 0 ? 1.0 : std::max(1.0, m.cwiseAbs().maxCoeff());
}

void guard_size(std::size_t m) {
  if (m > kMaxEnumerationItems) {
    throw OracleError("enumeration over " + std::to_string(m) + " items exceeds the guard of " +
                      std::to_string(kMaxEnumerationItems));
  }
}

double det(const Eigen::MatrixXd& m) {
  if (m.rows() == 0) {
    return 1.0;
  }
  return m.partialPivLu().determinant();
}

// Calls visit(items) for every size-r subset of `pool`, items ascending.
template <typename Visit>
void for_each_combination(std::span<const ItemIndex> pool, std::size_t r, Visit&& visit) {
  std::vector<ItemIndex> current;
  current.reserve(r);
  auto recurse = [&](auto&& self, std::size_t start) -> void {
    if (current.size() == r) {
      visit(std::as_const(current));
      return;
    }
    for (std::size_t i = start; i + (r - current.size()) <= pool.size(); ++i) {
      current.push_back(pool[i]);
      self(self, i + 1);
      current.pop_back();
    }
  };
  recurse(recurse, 0);
}

}  // namespace

DenseKernel::DenseKernel(Eigen::MatrixXd values) : values_(std::move(values)) {
  if (values_.rows() != values_.cols()) {
    throw OracleError("kernel must be square");
  }
  if (values_.size() == 0) {
    return;
  }
  const double scale = magnitude(values_);
  if ((values_ - values_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw OracleError("kernel is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(values_, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() < -1e-8 * scale) {
    throw OracleError("kernel is not positive semi-definite");
  }
}

DenseKernel DenseKernel::from_traits(const TraitMatrix& traits) {
  const auto& v = traits.values();
  Eigen::MatrixXd l = v * v.transpose();
  return DenseKernel(0.5 * (l + l.transpose()));
}

Eigen::MatrixXd principal_submatrix(const Eigen::MatrixXd& kernel, std::span<const ItemIndex> items) {
  const auto n = static_cast<Eigen::Index>(items.size());
  Eigen::MatrixXd out(n, n);
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index c = 0; c < n; ++c) {
      out(r, c) = kernel(static_cast<Eigen::Index>(items[static_cast<std::size_t>(r)]),
                         static_cast<Eigen::Index>(items[static_cast<std::size_t>(c)]));
    }
  }
  return out;
}

std::vector<ItemIndex> complement(std::size_t num_items, const Basket& basket) {
  std::vector<ItemIndex> out;
  for (ItemIndex i = 0; i < num_items; ++i) {
    if (!basket.contains(i)) {
      out.push_back(i);
    }
  }
  return out;
}

double enumerate_normalizer(const DenseKernel& kernel) {
  const std::size_t m = kernel.size();
  guard_size(m);
  double total = 0.0;
  std::vector<ItemIndex> items;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << m); ++mask) {
    items.clear();
    for (std::size_t i = 0; i < m; ++i) {
      if (mask & (std::uint64_t{1} << i)) {
        items.push_back(i);
      }
    }
    total += det(principal_submatrix(kernel.values(), items));
  }
  return total;
}

namespace {

void check_basket(const Eigen::MatrixXd& kernel, const Basket& basket) {
  if (!basket.empty() && basket.items().back() >= static_cast<std::size_t>(kernel.rows())) {
    throw OracleError("basket item out of range");
  }
  const Eigen::MatrixXd la = principal_submatrix(kernel, basket.items());
  if (basket.size() > 0 && GramFactor(la).singular()) {
    throw OracleError("L_A is singular");
  }
}

}  // namespace

Eigen::MatrixXd conditional_kernel_inverse_form(const Eigen::MatrixXd& kernel, const Basket& basket) {
  check_basket(kernel, basket);
  const auto m = static_cast<std::size_t>(kernel.rows());
  const std::vector<ItemIndex> rest = complement(m, basket);
  Eigen::MatrixXd shifted = kernel;
  for (ItemIndex i : rest) {
    shifted(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) += 1.0;
  }
  const Eigen::MatrixXd inv = shifted.partialPivLu().inverse();
  const Eigen::MatrixXd restricted = principal_submatrix(inv, rest);
  const auto n = static_cast<Eigen::Index>(rest.size());
  return restricted.partialPivLu().inverse() - Eigen::MatrixXd::Identity(n, n);
}

Eigen::MatrixXd conditional_kernel_schur_form(const Eigen::MatrixXd& kernel, const Basket& basket) {
  check_basket(kernel, basket);
  const auto m = static_cast<std::size_t>(kernel.rows());
  const std::vector<ItemIndex> rest = complement(m, basket);
  const Eigen::MatrixXd l_rest = principal_submatrix(kernel, rest);
  if (basket.empty()) {
    return l_rest;
  }
  const auto n = static_cast<Eigen::Index>(rest.size());
  const auto a = static_cast<Eigen::Index>(basket.size());
  Eigen::MatrixXd cross(n, a);
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index c = 0; c < a; ++c) {
      cross(r, c) = kernel(static_cast<Eigen::Index>(rest[static_cast<std::size_t>(r)]),
                           static_cast<Eigen::Index>(basket[static_cast<std::size_t>(c)]));
    }
  }
  const Eigen::MatrixXd la = principal_submatrix(kernel, basket.items());
  return l_rest - cross * la.partialPivLu().solve(cross.transpose());
}

DenseKernel condition_full_rank(const DenseKernel& kernel, const Basket& basket) {
  const Eigen::MatrixXd inverse_form = conditional_kernel_inverse_form(kernel.values(), basket);
  const Eigen::MatrixXd schur_form = conditional_kernel_schur_form(kernel.values(), basket);
  if (schur_form.size() > 0) {
    const double diff = (inverse_form - schur_form).cwiseAbs().maxCoeff();
    if (diff > 1e-8) {
      throw OracleError("conditional kernel forms disagree by " + std::to_string(diff));
    }
  }
  return DenseKernel(0.5 * (schur_form + schur_form.transpose()));
}

std::vector<CompletionProbability> brute_force_conditional(const DenseKernel& kernel,
                                                           const Basket& basket, std::size_t k) {
  const std::size_t m = kernel.size();
  guard_size(m);
  if (k < basket.size()) {
    throw OracleError("k is smaller than the conditioned basket");
  }
  check_basket(kernel.values(), basket);
  const std::vector<ItemIndex> rest = complement(m, basket);
  std::vector<CompletionProbability> table;
  double total = 0.0;
  for_each_combination(std::span<const ItemIndex>(rest), k - basket.size(),
                       [&](const std::vector<ItemIndex>& added) {
                         std::vector<ItemIndex> joint(basket.begin(), basket.end());
                         joint.insert(joint.end(), added.begin(), added.end());
                         std::sort(joint.begin(), joint.end());
                         const double d = std::max(0.0, det(principal_submatrix(kernel.values(), joint)));
                         table.push_back({added, d});
                         total += d;
                       });
  if (!(total > 0.0)) {
    throw OracleError("no completion of size " + std::to_string(k) + " has positive probability");
  }
  for (auto& entry : table) {
    entry.probability /= total;
  }
  return table;
}

Eigen::MatrixXd finite_difference_gradient(const MatrixFunction& f, const Eigen::MatrixXd& at,
                                           double step) {
  if (!(step > 0.0)) {
    throw OracleError("finite-difference step must be positive");
  }
  Eigen::MatrixXd grad(at.rows(), at.cols());
  Eigen::MatrixXd probe = at;
  for (Eigen::Index i = 0; i < at.rows(); ++i) {
    for (Eigen::Index j = 0; j < at.cols(); ++j) {
      probe(i, j) = at(i, j) + step;
      const double plus = f(probe);
      probe(i, j) = at(i, j) - step;
      const double minus = f(probe);
      probe(i, j) = at(i, j);
      if (!std::isfinite(plus) || !std::isfinite(minus)) {
        throw OracleError("objective is not finite at a finite-difference probe");
      }
      grad(i, j) = (plus - minus) / (2.0 * step);
    }
  }
  return grad;
}

}  // namespace lrdpp::oracle
