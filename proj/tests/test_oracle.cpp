#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "lrdpp/check.hpp"
#include "lrdpp/error.hpp"
#include "lrdpp/oracle.hpp"

using namespace lrdpp;
using namespace lrdpp::oracle;

namespace {

DenseKernel random_full_rank(std::size_t m, std::uint64_t seed) {
  const auto x = check::random_traits(m, m, seed, 1.0 / std::sqrt(static_cast<double>(m)));
  Eigen::MatrixXd l = x.values() * x.values().transpose();
  l.diagonal().array() += 0.1;
  return DenseKernel(0.5 * (l + l.transpose()));
}

}  // namespace

TEST_CASE("dense kernel validation") {
  Eigen::MatrixXd asym = Eigen::MatrixXd::Identity(3, 3);
  asym(0, 1) = 0.5;
  CHECK_THROWS_AS(DenseKernel{asym}, OracleError);
  Eigen::MatrixXd indefinite = Eigen::MatrixXd::Identity(2, 2);
  indefinite(1, 1) = -1.0;
  CHECK_THROWS_AS(DenseKernel{indefinite}, OracleError);
  CHECK_NOTHROW(DenseKernel{Eigen::MatrixXd::Zero(4, 4)});
}

TEST_CASE("enumerated normalizer") {
  CHECK(enumerate_normalizer(DenseKernel(Eigen::MatrixXd::Zero(4, 4))) == 1.0);
  CHECK(enumerate_normalizer(DenseKernel(Eigen::MatrixXd::Identity(3, 3))) == doctest::Approx(8.0));
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto l = random_full_rank(8, seed);
    const double direct = (l.values() + Eigen::MatrixXd::Identity(8, 8)).determinant();
    CHECK(std::abs(enumerate_normalizer(l) - direct) <= 1e-9 * direct);
  }
  CHECK_THROWS_AS(enumerate_normalizer(DenseKernel(Eigen::MatrixXd::Identity(21, 21))), OracleError);
}

TEST_CASE("full-rank conditioning") {
  SUBCASE("empty basket returns L") {
    const auto l = random_full_rank(6, 1);
    const auto cond = condition_full_rank(l, Basket{});
    CHECK((cond.values() - l.values()).cwiseAbs().maxCoeff() <= 1e-12);
  }
  SUBCASE("diagonal kernel restricts to the complement") {
    Eigen::VectorXd d(5);
    d << 0.5, 2.0, 1.0, 3.0, 0.25;
    const DenseKernel l(d.asDiagonal().toDenseMatrix());
    const auto cond = condition_full_rank(l, Basket{1, 3});
    Eigen::MatrixXd expected = Eigen::MatrixXd::Zero(3, 3);
    expected.diagonal() << 0.5, 1.0, 0.25;
    CHECK((cond.values() - expected).cwiseAbs().maxCoeff() <= 1e-12);
  }
  SUBCASE("inverse and Schur forms agree on full-rank kernels") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 20; ++trial) {
      const std::size_t m = 3 + rng() % 15;
      const auto l = random_full_rank(m, rng());
      std::vector<ItemIndex> items;
      for (std::size_t i = 0; i < m; ++i)
        if (rng() % 3 == 0 && items.size() < 5) items.push_back(i);
      if (items.size() == m) items.pop_back();
      const Basket a(items);
      const auto inv = conditional_kernel_inverse_form(l.values(), a);
      const auto schur = conditional_kernel_schur_form(l.values(), a);
      CHECK((inv - schur).cwiseAbs().maxCoeff() <= 1e-8);
      CHECK_NOTHROW(condition_full_rank(l, a));
    }
  }
  SUBCASE("singular L_A") {
    Eigen::MatrixXd v(3, 1);
    v << 1.0, 2.0, 3.0;
    const DenseKernel l(v * v.transpose());
    CHECK_THROWS_AS(condition_full_rank(l, Basket{0, 1}), OracleError);
  }
}

TEST_CASE("brute-force conditional table") {
  const auto l = random_full_rank(7, 4);
  SUBCASE("k = |A| gives the empty completion") {
    const auto table = brute_force_conditional(l, Basket{1, 2}, 2);
    REQUIRE(table.size() == 1);
    CHECK(table[0].added.empty());
    CHECK(table[0].probability == 1.0);
  }
  SUBCASE("probabilities sum to one") {
    for (std::size_t k = 1; k <= 5; ++k) {
      const auto table = brute_force_conditional(l, Basket{3}, k);
      double sum = 0.0;
      for (const auto& e : table) {
        CHECK(e.added.size() == k - 1);
        CHECK(e.probability >= 0.0);
        sum += e.probability;
      }
      CHECK(std::abs(sum - 1.0) <= 1e-12);
    }
  }
  SUBCASE("pairs are proportional to det of the conditional kernel") {
    const Basket a{0, 5};
    const auto cond = condition_full_rank(l, a);
    const auto table = brute_force_conditional(l, a, 4);
    const auto rest = complement(7, a);
    double z = 0.0;
    for (const auto& e : table) {
      std::vector<ItemIndex> local;
      for (auto item : e.added) local.push_back(static_cast<ItemIndex>(std::find(rest.begin(), rest.end(), item) - rest.begin()));
      z += principal_submatrix(cond.values(), local).determinant();
    }
    for (const auto& e : table) {
      std::vector<ItemIndex> local;
      for (auto item : e.added) local.push_back(static_cast<ItemIndex>(std::find(rest.begin(), rest.end(), item) - rest.begin()));
      CHECK(e.probability == doctest::Approx(principal_submatrix(cond.values(), local).determinant() / z).epsilon(1e-9));
    }
  }
  CHECK_THROWS_AS(brute_force_conditional(l, Basket{1, 2}, 1), OracleError);
}

TEST_CASE("finite differences") {
  const auto v = check::random_traits(4, 3, 2);
  const auto g = finite_difference_gradient([](const Eigen::MatrixXd& x) { return 0.5 * x.squaredNorm(); },
                                            v.values());
  CHECK((g - v.values()).cwiseAbs().maxCoeff() <= 1e-9);
  CHECK_THROWS_AS(finite_difference_gradient([](const Eigen::MatrixXd& x) { return std::log(x(0, 0)); },
                                             Eigen::MatrixXd::Zero(1, 1)),
                  OracleError);
}
