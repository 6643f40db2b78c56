#include "lrdpp/check.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>

#include "lrdpp/conditioning.hpp"
#include "lrdpp/error.hpp"
#include "lrdpp/oracle.hpp"

namespace lrdpp::check {

std::uint64_t trial_seed(std::uint64_t base_seed, std::size_t trial) { return base_seed + trial; }

TraitMatrix random_traits(std::size_t num_items, std::size_t num_traits, std::uint64_t seed,
                          double scale) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, scale);
  Eigen::MatrixXd v(static_cast<Eigen::Index>(num_items), static_cast<Eigen::Index>(num_traits));
  for (Eigen::Index i = 0; i < v.rows(); ++i) {
    for (Eigen::Index k = 0; k < v.cols(); ++k) {
      v(i, k) = normal(rng);
    }
  }
  return TraitMatrix(std::move(v));
}

double max_relative_error(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double absolute_floor) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    return std::numeric_limits<double>::infinity();
  }
  double worst = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      const double diff = std::abs(a(i, j) - b(i, j));
      const double mag = std::max(std::abs(a(i, j)), std::abs(b(i, j)));
      worst = std::max(worst, mag < absolute_floor ? diff : diff / mag);
    }
  }
  return worst;
}

namespace {

std::size_t uniform(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

Basket random_basket(std::mt19937_64& rng, std::size_t num_items, std::size_t size) {
  std::vector<ItemIndex> all(num_items);
  std::iota(all.begin(), all.end(), ItemIndex{0});
  std::shuffle(all.begin(), all.end(), rng);
  all.resize(size);
  return Basket(std::move(all));
}

template <typename Trial>
PropertyResult run_property(const std::string& name, double tolerance, const CheckOptions& options,
                            Trial&& trial) {
  PropertyResult result;
  result.name = name;
  result.tolerance = tolerance;
  result.trials = options.trials;
  for (std::size_t t = 0; t < options.trials; ++t) {
    const std::uint64_t seed = trial_seed(options.seed, t);
    double error = 0.0;
    try {
      error = trial(seed);
    } catch (const Error&) {
      error = std::numeric_limits<double>::infinity();
    }
    if (std::isnan(error)) {
      error = std::numeric_limits<double>::infinity();
    }
    result.max_error = std::max(result.max_error, error);
    if (!(error <= tolerance)) {
      ++result.failures;
      if (!result.first_failing_seed) {
        result.first_failing_seed = seed;
      }
    }
  }
  return result;
}

std::vector<std::vector<ItemIndex>> all_subsets(std::size_t m) {
  std::vector<std::vector<ItemIndex>> out;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << m); ++mask) {
    std::vector<ItemIndex> items;
    for (std::size_t i = 0; i < m; ++i) {
      if (mask & (std::uint64_t{1} << i)) {
        items.push_back(i);
      }
    }
    out.push_back(std::move(items));
  }
  return out;
}

}  // namespace

PropertyResult check_normalizer(const CheckOptions& options) {
  return run_property("normalization", 1e-8, options, [](std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const std::size_t m = uniform(rng, 1, 10);
    const std::size_t k = uniform(rng, 1, 4);
    const TraitMatrix v = random_traits(m, k, rng());
    const double log_norm = log_normalizer(v);
    double total = 0.0;
    for (const auto& items : all_subsets(m)) {
      total += std::exp(dpp_log_prob(v, Basket(items), log_norm));
    }
    return std::abs(total - 1.0);
  });
}

PropertyResult check_normalizer_identity(const CheckOptions& options) {
  return run_property("normalizer_identity", 1e-9, options, [](std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const std::size_t m = uniform(rng, 1, 10);
    const std::size_t k = uniform(rng, 1, 4);
    const TraitMatrix v = random_traits(m, k, rng());
    const double fast = std::exp(log_normalizer(v));
    const double brute = oracle::enumerate_normalizer(oracle::DenseKernel::from_traits(v));
    return std::abs(fast - brute) / std::abs(brute);
  });
}

PropertyResult check_gradient(const CheckOptions& options) {
  GradientFunction grad_fn = options.gradient;
  if (!grad_fn) {
    grad_fn = [](const TraitMatrix& v, std::span<const Basket> batch, std::size_t n,
                 const RegularizationWeights& reg) { return gradient(v, batch, n, reg); };
  }
  return run_property("gradient", 1e-5, options, [&grad_fn](std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    constexpr double alphas[] = {0.0, 0.1, 1.0};
    const double alpha = alphas[uniform(rng, 0, 2)];
    const std::size_t m = uniform(rng, 2, 8);
    const std::size_t k = uniform(rng, 1, 3);
    const TraitMatrix v = random_traits(m, k, rng());
    std::vector<Basket> baskets;
    const std::size_t n = uniform(rng, 1, 6);
    std::vector<std::size_t> counts(m, 0);
    for (std::size_t b = 0; b < n; ++b) {
      baskets.push_back(random_basket(rng, m, uniform(rng, 1, std::min(k, m))));
      for (ItemIndex i : baskets.back()) {
        ++counts[i];
      }
    }
    const RegularizationWeights reg = popularity_weights(counts, alpha);
    const Eigen::MatrixXd analytic = grad_fn(v, baskets, baskets.size(), reg);
    const Eigen::MatrixXd numeric = oracle::finite_difference_gradient(
        [&](const Eigen::MatrixXd& probe) { return objective(TraitMatrix(probe), baskets, reg); },
        v.values());
    return max_relative_error(analytic, numeric);
  });
}

PropertyResult check_conditioning(const CheckOptions& options) {
  return run_property("conditioning", 1e-8, options, [](std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const std::size_t a = uniform(rng, 0, 5);
    const std::size_t m = uniform(rng, std::max<std::size_t>(a + 1, 6), 20);
    const std::size_t k = uniform(rng, std::max<std::size_t>(a, 1), 8);
    const TraitMatrix v = random_traits(m, k, rng());
    const Basket basket = random_basket(rng, m, a);
    const ConditionedModel cm = condition(v, basket);
    const Eigen::MatrixXd low_rank = cm.conditioned_traits() * cm.conditioned_traits().transpose();
    const Eigen::MatrixXd l = oracle::DenseKernel::from_traits(v).values();
    const Eigen::MatrixXd inverse_form = oracle::conditional_kernel_inverse_form(l, basket);
    const Eigen::MatrixXd schur_form = oracle::conditional_kernel_schur_form(l, basket);
    return std::max((low_rank - inverse_form).cwiseAbs().maxCoeff(),
                    (low_rank - schur_form).cwiseAbs().maxCoeff());
  });
}

PropertyResult check_conditional_probabilities(const CheckOptions& options) {
  return run_property("conditional_probabilities", 1e-9, options, [](std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const std::size_t k = uniform(rng, 2, 5);
    const std::size_t a = uniform(rng, 1, std::min<std::size_t>(k - 1, 4));
    const std::size_t m = uniform(rng, a + 2, 12);
    const TraitMatrix v = random_traits(m, k, rng());
    const Basket basket = random_basket(rng, m, a);
    const ConditionedModel cm = condition(v, basket);
    const std::vector<double> p = next_item_probabilities(cm);
    const auto table =
        oracle::brute_force_conditional(oracle::DenseKernel::from_traits(v), basket, basket.size() + 1);
    if (table.size() != p.size()) {
      return std::numeric_limits<double>::infinity();
    }
    double worst = 0.0;
    double sum = 0.0;
    for (std::size_t r = 0; r < p.size(); ++r) {
      if (table[r].added.size() != 1 || table[r].added[0] != cm.candidates()[r]) {
        return std::numeric_limits<double>::infinity();
      }
      const double mag = std::max(std::abs(p[r]), std::abs(table[r].probability));
      const double diff = std::abs(p[r] - table[r].probability);
      worst = std::max(worst, mag < 1e-12 ? diff : diff / mag);
      sum += p[r];
    }
    if (std::abs(sum - 1.0) > 1e-12) {
      return std::numeric_limits<double>::infinity();
    }
    return worst;
  });
}

std::vector<PropertyResult> run_all(const CheckOptions& options) {
  return {check_normalizer(options), check_normalizer_identity(options), check_gradient(options),
          check_conditioning(options), check_conditional_probabilities(options)};
}

void print_results(std::ostream& out, std::span<const PropertyResult> results) {
  const auto flags = out.flags();
  const auto precision = out.precision();
  out << std::left << std::setw(6) << "status" << ' ' << std::setw(28) << "property" << std::right
      << std::setw(8) << "trials" << std::setw(10) << "failures" << std::setw(14) << "max_error"
      << std::setw(12) << "tolerance" << '\n';
  out << std::scientific << std::setprecision(3);
  for (const auto& r : results) {
    out << std::left << std::setw(6) << (r.passed() ? "PASS" : "FAIL") << ' ' << std::setw(28) << r.name
        << std::right << std::setw(8) << r.trials << std::setw(10) << r.failures << std::setw(14)
        << r.max_error << std::setw(12) << r.tolerance;
    if (r.first_failing_seed) {
      out << "  first failing seed " << *r.first_failing_seed;
    }
    out << '\n';
  }
  out.flags(flags);
  out.precision(precision);
}

}  // namespace lrdpp::check
