#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "lrdpp/check.hpp"
#include "lrdpp/error.hpp"
#include "lrdpp/kernel.hpp"
#include "lrdpp/oracle.hpp"
#include "support/synthetic.hpp"

using namespace lrdpp;

namespace {

// Laplace expansion along the first row.
double cofactor_det(const Eigen::MatrixXd& a) {
  const auto n = a.rows();
  if (n == 0) return 1.0;
  if (n == 1) return a(0, 0);
  double det = 0.0;
  for (Eigen::Index c = 0; c < n; ++c) {
    Eigen::MatrixXd minor(n - 1, n - 1);
    for (Eigen::Index r = 1; r < n; ++r) {
      Eigen::Index cc = 0;
      for (Eigen::Index k = 0; k < n; ++k) {
        if (k == c) continue;
        minor(r - 1, cc++) = a(r, k);
      }
    }
    det += (c % 2 == 0 ? 1.0 : -1.0) * a(0, c) * cofactor_det(minor);
  }
  return det;
}

TraitMatrix matrix_of(std::initializer_list<std::initializer_list<double>> rows) {
  Eigen::MatrixXd v(rows.size(), rows.begin()->size());
  Eigen::Index i = 0;
  for (auto row : rows) {
    Eigen::Index j = 0;
    for (double x : row) v(i, j++) = x;
    ++i;
  }
  return TraitMatrix(v);
}

}  // namespace

TEST_CASE("log_det_basket of a singleton") {
  auto v = matrix_of({{2.0, 0.0}, {1.0, 1.0}});
  CHECK(log_det_basket(v, Basket{0}) == doctest::Approx(std::log(4.0)).epsilon(1e-15));
  CHECK(log_det_basket(v, Basket{}) == 0.0);
}

TEST_CASE("collinear rows give negative infinity") {
  auto v = matrix_of({{1.0, 2.0}, {1.0, 2.0}, {0.0, 1.0}});
  CHECK(log_det_basket(v, Basket{0, 1}) == kNegInf);
  auto scaled = matrix_of({{1.0, 2.0, 0.5}, {-3.0, -6.0, -1.5}, {0.0, 1.0, 0.0}});
  CHECK(log_det_basket(scaled, Basket{0, 1}) == kNegInf);
  CHECK(std::isfinite(log_det_basket(scaled, Basket{0, 2})));
}

TEST_CASE("log_det_basket matches cofactor expansion") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 30; ++trial) {
    const auto v = check::random_traits(6, 3, rng());
    std::vector<ItemIndex> items(6);
    std::iota(items.begin(), items.end(), ItemIndex{0});
    std::shuffle(items.begin(), items.end(), rng);
    items.resize(3);
    const Basket y(items);
    const Eigen::MatrixXd rows = v.rows(y.items());
    const double expected = std::log(cofactor_det(rows * rows.transpose()));
    CHECK(std::abs(log_det_basket(v, y) - expected) <= 1e-10 * std::abs(expected) + 1e-14);
  }
}

TEST_CASE("frozen log det of a fixed basket") {
  // Independently computed with numpy.
  const auto v = testing::fixed_traits_8x3();
  CHECK(log_det_basket(v, Basket{0, 2, 5}) == doctest::Approx(-3.9902007864921685).epsilon(1e-12));
}

TEST_CASE("log_det is symmetric under permutation") {
  std::mt19937_64 rng(5);
  const auto v = check::random_traits(7, 4, 99);
  std::vector<ItemIndex> items{1, 3, 4, 6};
  const double base = log_det_subset(v, items);
  for (int trial = 0; trial < 10; ++trial) {
    std::shuffle(items.begin(), items.end(), rng);
    CHECK(log_det_subset(v, items) == doctest::Approx(base).epsilon(1e-13));
  }
  CHECK(log_det_subset(v, std::vector<ItemIndex>{1, 1}) == kNegInf);
}

TEST_CASE("out of range items are rejected") {
  const auto v = check::random_traits(4, 2, 1);
  CHECK_THROWS_AS(log_det_basket(v, Basket{0, 4}), KernelError);
  CHECK_THROWS_AS(dpp_log_prob(v, Basket{7}), KernelError);
}

TEST_CASE("trait matrix rejects non-finite entries and empty shapes") {
  Eigen::MatrixXd v = Eigen::MatrixXd::Ones(3, 2);
  v(1, 1) = std::nan("");
  CHECK_THROWS_AS(TraitMatrix{v}, KernelError);
  v(1, 1) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(TraitMatrix{v}, KernelError);
  CHECK_THROWS_AS(TraitMatrix{Eigen::MatrixXd(3, 0)}, KernelError);
}

TEST_CASE("log_normalizer closed cases") {
  CHECK(log_normalizer(TraitMatrix::zeros(5, 3)) == 0.0);
  CHECK(log_normalizer(matrix_of({{2.0}})) == doctest::Approx(std::log(5.0)).epsilon(1e-15));
  // Independently computed with numpy by enumerating all 256 subsets.
  Eigen::MatrixXd v2(8, 2);
  v2 << 0.5, -0.2, 0.1, 0.9, -0.7, 0.3, 0.4, 0.4, 0.0, -0.6, 0.8, 0.1, -0.3, -0.5, 0.2, 0.7;
  CHECK(log_normalizer(TraitMatrix(v2)) == doctest::Approx(2.1408540882961002).epsilon(1e-13));
}

TEST_CASE("log_normalizer equals subset enumeration") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto v = check::random_traits(8, 2, seed);
    const double brute = oracle::enumerate_normalizer(oracle::DenseKernel::from_traits(v));
    CHECK(std::abs(log_normalizer(v) - std::log(brute)) <= 1e-9 * std::log(brute));
  }
}

TEST_CASE("K x K route equals M x M route up to M = 50") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t m = std::uniform_int_distribution<std::size_t>(1, 50)(rng);
    const std::size_t k = std::uniform_int_distribution<std::size_t>(1, 6)(rng);
    const auto v = check::random_traits(m, k, rng(), 0.5);
    const Eigen::MatrixXd shifted =
        v.values() * v.values().transpose() + Eigen::MatrixXd::Identity(m, m);
    const double dense = std::log(shifted.partialPivLu().determinant());
    CHECK(std::abs(log_normalizer(v) - dense) <= 1e-9 * std::abs(dense));
  }
}

TEST_CASE("dpp_log_prob special cases") {
  const auto v = check::random_traits(6, 2, 3);
  CHECK(dpp_log_prob(v, Basket{}) == doctest::Approx(-log_normalizer(v)));
  CHECK(dpp_log_prob(v, Basket{0, 1, 2}) == kNegInf);
}

TEST_CASE("probabilities over all subsets sum to one") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t m = std::uniform_int_distribution<std::size_t>(1, 10)(rng);
    const std::size_t k = std::uniform_int_distribution<std::size_t>(1, 4)(rng);
    const auto v = check::random_traits(m, k, rng());
    const auto l = oracle::DenseKernel::from_traits(v).values();
    const double norm = oracle::enumerate_normalizer(oracle::DenseKernel::from_traits(v));
    double total = 0.0;
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << m); ++mask) {
      std::vector<ItemIndex> items;
      for (std::size_t i = 0; i < m; ++i)
        if (mask >> i & 1) items.push_back(i);
      const double lp = dpp_log_prob(v, Basket(items));
      total += std::exp(lp);
      if (!items.empty() && items.size() <= k && std::isfinite(lp)) {
        const double brute = oracle::principal_submatrix(l, items).determinant() / norm;
        CHECK(std::abs(std::exp(lp) - brute) <= 1e-9 * std::max(brute, 1e-300) + 1e-15);
      }
    }
    CHECK(std::abs(total - 1.0) <= 1e-8);
  }
}
