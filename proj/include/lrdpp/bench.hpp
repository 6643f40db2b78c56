#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace lrdpp::bench {

struct BenchRow {
  std::size_t num_items = 0;
  double low_rank_ms = 0.0;   // mean over trials: condition + score
  double full_rank_ms = 0.0;  // mean over trials: two-inversion form + score
  double speedup() const { return low_rank_ms > 0.0 ? full_rank_ms / low_rank_ms : 0.0; }
  std::size_t low_rank_bytes = 0;   // M K 8
  std::size_t full_rank_bytes = 0;  // M M 8
};

struct BenchOptions {
  std::vector<std::size_t> num_items{100, 500, 1000, 2000};
  std::size_t num_traits = 15;
  std::size_t basket_size = 3;
  std::size_t trials = 5;
  std::uint64_t seed = 1;
};

// Times next-item prediction for a random basket, low-rank vs full-rank
// conditioning, on random models of each catalog size.
std::vector<BenchRow> run(const BenchOptions& options);

void print_table(std::ostream& out, std::span<const BenchRow> rows);

}  // namespace lrdpp::bench
