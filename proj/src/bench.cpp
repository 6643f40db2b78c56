#include "lrdpp/bench.hpp"

#include <chrono>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <random>

#include "lrdpp/check.hpp"
#include "lrdpp/conditioning.hpp"
#include "lrdpp/error.hpp"
#include "lrdpp/oracle.hpp"

namespace lrdpp::bench {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

Basket random_basket(std::mt19937_64& rng, std::size_t num_items, std::size_t size) {
  std::vector<ItemIndex> all(num_items);
  std::iota(all.begin(), all.end(), ItemIndex{0});
  std::shuffle(all.begin(), all.end(), rng);
  all.resize(size);
  return Basket(std::move(all));
}

}  // namespace

std::vector<BenchRow> run(const BenchOptions& options) {
  if (options.trials < 1 || options.num_traits < 1) {
    throw Error("bench needs at least one trial and one trait");
  }
  if (options.basket_size > options.num_traits) {
    throw Error("basket size exceeds K; the low-rank model cannot condition on it");
  }
  std::vector<BenchRow> rows;
  std::mt19937_64 rng(options.seed);
  double sink = 0.0;
  for (std::size_t m : options.num_items) {
    if (m <= options.basket_size) {
      throw Error("catalog size must exceed the basket size");
    }
    const double scale = 1.0 / std::sqrt(static_cast<double>(options.num_traits));
    const TraitMatrix traits = check::random_traits(m, options.num_traits, rng(), scale);
    Eigen::MatrixXd dense = traits.values() * traits.values().transpose();
    dense.diagonal().array() += 0.5;

    BenchRow row;
    row.num_items = m;
    row.low_rank_bytes = m * options.num_traits * sizeof(double);
    row.full_rank_bytes = m * m * sizeof(double);
    for (std::size_t t = 0; t < options.trials; ++t) {
      const Basket basket = random_basket(rng, m, options.basket_size);

      auto start = Clock::now();
      const std::vector<double> p = next_item_probabilities(condition(traits, basket));
      row.low_rank_ms += elapsed_ms(start);
      sink += p.front();

      start = Clock::now();
      const Eigen::MatrixXd conditioned = oracle::conditional_kernel_inverse_form(dense, basket);
      const Eigen::VectorXd q = conditioned.diagonal() / conditioned.trace();
      row.full_rank_ms += elapsed_ms(start);
      sink += q(0);
    }
    row.low_rank_ms /= static_cast<double>(options.trials);
    row.full_rank_ms /= static_cast<double>(options.trials);
    rows.push_back(row);
  }
  if (std::isnan(sink)) {
    rows.clear();
  }
  return rows;
}

void print_table(std::ostream& out, std::span<const BenchRow> rows) {
  const auto flags = out.flags();
  const auto precision = out.precision();
  out << std::setw(8) << "M" << std::setw(16) << "low_rank_ms" << std::setw(16) << "full_rank_ms"
      << std::setw(10) << "speedup" << std::setw(16) << "low_rank_bytes" << std::setw(16)
      << "full_rank_bytes" << '\n';
  out << std::fixed;
  for (const auto& r : rows) {
    out << std::setw(8) << r.num_items << std::setprecision(4) << std::setw(16) << r.low_rank_ms
        << std::setw(16) << r.full_rank_ms << std::setprecision(1) << std::setw(10) << r.speedup()
        << std::setw(16) << r.low_rank_bytes << std::setw(16) << r.full_rank_bytes << '\n';
  }
  out.flags(flags);
  out.precision(precision);
}

}  // namespace lrdpp::bench
