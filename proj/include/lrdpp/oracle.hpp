#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "lrdpp/basket.hpp"
#include "lrdpp/kernel.hpp"

// Brute-force reference computations on dense kernels. Deliberately naive;
// used by tests and the `check` command.
namespace lrdpp::oracle {

inline constexpr std::size_t kMaxEnumerationItems = 20;

// Symmetric positive semi-definite M x M kernel.
class DenseKernel {
public:
  // Throws OracleError if not symmetric or not PSD within tolerance.
  explicit DenseKernel(Eigen::MatrixXd values);
  static DenseKernel from_traits(const TraitMatrix& traits);

  const Eigen::MatrixXd& values() const { return values_; }
  std::size_t size() const { return static_cast<std::size_t>(values_.rows()); }

private:
  Eigen::MatrixXd values_;
};

// Principal submatrix L_Y.
Eigen::MatrixXd principal_submatrix(const Eigen::MatrixXd& kernel, std::span<const ItemIndex> items);

// The items of [0, M) not in `basket`, ascending.
std::vector<ItemIndex> complement(std::size_t num_items, const Basket& basket);

// sum over all subsets Y of det(L_Y), the empty set contributing 1.
double enumerate_normalizer(const DenseKernel& kernel);

// ([(L + I_{not A})^{-1}]_{not A})^{-1} - I, two M-sized inversions.
Eigen::MatrixXd conditional_kernel_inverse_form(const Eigen::MatrixXd& kernel, const Basket& basket);

// L_{not A} - L_{not A, A} L_A^{-1} L_{A, not A}.
Eigen::MatrixXd conditional_kernel_schur_form(const Eigen::MatrixXd& kernel, const Basket& basket);

// Computes both conditional forms, throws OracleError if they differ by more
// than 1e-8 in any entry, and returns the Schur form. Rows/columns follow
// complement(M, basket).
DenseKernel condition_full_rank(const DenseKernel& kernel, const Basket& basket);

struct CompletionProbability {
  std::vector<ItemIndex> added;  // catalog indices, ascending
  double probability;
};

// Conditional k-DPP over completions: for every B disjoint from A with
// |B| = k - |A|, P(A u B) proportional to det(L_{A u B}), normalized over all
// such B.
std::vector<CompletionProbability> brute_force_conditional(const DenseKernel& kernel,
                                                           const Basket& basket,
                                                           std::size_t k);

using MatrixFunction = std::function<double(const Eigen::MatrixXd&)>;

inline constexpr double kDefaultFiniteDifferenceStep = 1e-5;

// Central differences (f(V + hE_ik) - f(V - hE_ik)) / 2h for every entry.
Eigen::MatrixXd finite_difference_gradient(const MatrixFunction& f, const Eigen::MatrixXd& at,
                                           double step = kDefaultFiniteDifferenceStep);

}  // namespace lrdpp::oracle
