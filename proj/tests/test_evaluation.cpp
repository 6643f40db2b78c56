#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <memory>
#include <random>
#include <sstream>

#include "lrdpp/check.hpp"
#include "lrdpp/error.hpp"
#include "lrdpp/evaluation.hpp"
#include "support/synthetic.hpp"

using namespace lrdpp;

namespace {

Scorer random_scorer(std::size_t m, std::uint64_t seed) {
  auto rng = std::make_shared<std::mt19937_64>(seed);
  return [m, rng](const Basket&) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> s(m);
    for (auto& x : s) x = u(*rng);
    return s;
  };
}

// Scores 1 on `target`, 0 elsewhere; the target is looked up per basket.
Scorer pointing_scorer(std::size_t m, std::map<std::vector<ItemIndex>, ItemIndex> targets) {
  return [m, targets](const Basket& observed) {
    std::vector<double> s(m, 0.0);
    s[targets.at({observed.begin(), observed.end()})] = 1.0;
    return s;
  };
}

// Observed singleton {2i} and held-out items drawn over a catalog of 101
// items, so every instance has |C| = 100 candidates.
std::vector<EvalInstance> synthetic_instances(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<ItemIndex> item(0, 100);
  std::vector<EvalInstance> out;
  while (out.size() < n) {
    const ItemIndex a = item(rng), b = item(rng);
    if (a != b) out.push_back({Basket{a}, b});
  }
  return out;
}

}  // namespace

TEST_CASE("instances hold out one item each") {
  const std::vector<Basket> pair{Basket{3, 8}};
  const auto inst = make_instances(pair, 1);
  REQUIRE(inst.size() == 1);
  const bool ok = (inst[0].observed == Basket{3} && inst[0].held_out == 8) ||
                  (inst[0].observed == Basket{8} && inst[0].held_out == 3);
  CHECK(ok);

  std::vector<Basket> many;
  for (std::size_t n = 0; n < 1000; ++n) many.push_back(Basket{n % 13, 13 + n % 11, 30 + n % 5});
  const auto a = make_instances(many, 9);
  const auto b = make_instances(many, 9);
  CHECK(a.size() == 1000);
  std::size_t differ = 0;
  const auto c = make_instances(many, 10);
  for (std::size_t t = 0; t < a.size(); ++t) {
    CHECK(a[t].held_out == b[t].held_out);
    CHECK(a[t].observed == b[t].observed);
    CHECK(many[t].contains(a[t].held_out));
    CHECK_FALSE(a[t].observed.contains(a[t].held_out));
    CHECK(a[t].observed.size() == 2);
    differ += a[t].held_out != c[t].held_out;
  }
  CHECK(differ > 0);
  CHECK_THROWS_AS(make_instances(std::vector<Basket>{Basket{1}}, 0), DataError);
}

TEST_CASE("percentile rank follows the >= indicator") {
  std::vector<double> scores(50);
  for (std::size_t j = 0; j < 50; ++j) scores[j] = static_cast<double>(j);
  CHECK(percentile_rank(scores, 49) == 100.0);
  CHECK(percentile_rank(scores, 0) == 2.0);
  CHECK(percentile_rank(std::vector<double>(50, 0.3), 17) == 100.0);
}

TEST_CASE("rank breaks ties by position") {
  const std::vector<double> s{0.2, 0.5, 0.5, 0.1};
  CHECK(rank_of(s, 1) == 1);
  CHECK(rank_of(s, 2) == 2);
  CHECK(rank_of(s, 0) == 3);
  CHECK(rank_of(s, 3) == 4);
}

TEST_CASE("perfect scorer") {
  const auto instances = synthetic_instances(50, 3);
  std::map<std::vector<ItemIndex>, ItemIndex> targets;
  std::vector<EvalInstance> unique;
  for (const auto& inst : instances) {
    if (targets.emplace(std::vector<ItemIndex>{inst.observed.begin(), inst.observed.end()}, inst.held_out).second) {
      unique.push_back(inst);
    }
  }
  const auto scorer = pointing_scorer(101, targets);
  CHECK(mpr(unique, 101, scorer) == 100.0);
  const std::vector<std::size_t> ks{1, 5, 100};
  for (const auto& [k, p] : precision_at_k(unique, 101, scorer, ks)) CHECK(p == 1.0);
  CHECK(mpr(std::span(unique).first(1), 101, scorer) == 100.0);
}

TEST_CASE("random scorer on 2000 instances with 100 candidates") {
  const auto instances = synthetic_instances(2000, 4);
  const std::vector<std::size_t> ks{1, 5, 10, 20, 100};
  const auto scored = score_instances(instances, 101, random_scorer(101, 5));
  for (const auto& o : scored.outcomes) CHECK(o.num_candidates == 100);
  CHECK(std::abs(mpr(scored) - 50.0) <= 2.0);
  const auto prec = precision_at_k(scored, ks);
  for (std::size_t k : {5u, 10u, 20u}) {
    const double expected = static_cast<double>(k) / 100.0;
    CHECK(std::abs(prec.at(k) - expected) <= 0.2 * expected);
  }
  CHECK(prec.at(100) == 1.0);
  double prev = 0.0;
  for (const auto& [k, p] : prec) {
    CHECK(p >= prev);
    prev = p;
  }
  std::vector<std::size_t> counts(101);
  for (std::size_t i = 0; i < counts.size(); ++i) counts[i] = 1 + i % 17;
  const auto pop0 = pop_weighted_precision_at_k(scored, ks, counts, 0.0);
  for (std::size_t k : ks) CHECK(pop0.at(k) == prec.at(k));
}

TEST_CASE("popularity weighting") {
  ScoredInstances scored;
  scored.outcomes = {{0, 100.0, 1, 10}, {1, 10.0, 9, 10}};
  const std::vector<std::size_t> counts{1, 4};
  const std::vector<std::size_t> k1{1};
  CHECK(pop_weighted_precision_at_k(scored, k1, counts, 0.5).at(1) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(pop_weighted_precision_at_k(scored, k1, counts, 0.0).at(1) == 0.5);
  const std::vector<std::size_t> equal{3, 3};
  CHECK(pop_weighted_precision_at_k(scored, k1, equal, 0.5).at(1) ==
        doctest::Approx(precision_at_k(scored, k1).at(1)).epsilon(1e-15));
  // C = 0 uses the unseen-item pseudo-count.
  const std::vector<std::size_t> unseen{0, 2};
  const double w0 = 1.0 / std::sqrt(0.5), w1 = 1.0 / std::sqrt(2.0);
  CHECK(pop_weighted_precision_at_k(scored, k1, unseen, 0.5).at(1) == doctest::Approx(w0 / (w0 + w1)));
}

TEST_CASE("MPR depends only on score order") {
  const auto v = check::random_traits(30, 4, 3);
  std::vector<Basket> baskets;
  std::mt19937_64 rng(6);
  for (int n = 0; n < 80; ++n) baskets.push_back(Basket{rng() % 30, rng() % 30, rng() % 30});
  std::erase_if(baskets, [](const Basket& b) { return b.size() < 2; });
  const auto instances = make_instances(baskets, 2);
  const auto base_scorer = low_rank_scorer(v);
  const double base = mpr(instances, 30, base_scorer);
  const Scorer transformed = [&](const Basket& b) {
    auto s = base_scorer(b);
    for (auto& x : s) x = std::exp(3.0 * x) + 7.0;
    return s;
  };
  CHECK(mpr(instances, 30, transformed) == base);
  CHECK(base > 0.0);
  CHECK(base <= 100.0);
}

TEST_CASE("instances that cannot be conditioned are skipped") {
  Eigen::MatrixXd v = Eigen::MatrixXd::Random(6, 2);
  v.row(1) = v.row(0);
  const std::vector<EvalInstance> instances{{Basket{0, 1}, 2}, {Basket{0}, 3}, {Basket{2, 4}, 5}};
  const std::vector<std::size_t> ks{1, 2};
  const std::vector<std::size_t> counts(6, 1);
  const auto report = evaluate(instances, 6, low_rank_scorer(TraitMatrix(v)), ks, counts);
  // {0, 1} is singular; {2, 4} spans the whole trait space, leaving no mass.
  CHECK(report.n_instances == 1);
  CHECK(report.n_skipped == 2);
  CHECK(report.skip_reasons.at("conditioning on zero-probability basket") == 1);
  CHECK(report.skip_reasons.at("no probability mass remains") == 1);
  CHECK(report.mpr >= 0.0);
  CHECK(report.mpr <= 100.0);
  const std::vector<EvalInstance> hopeless{{Basket{0, 1}, 2}};
  CHECK_THROWS_AS(evaluate(hopeless, 6, low_rank_scorer(TraitMatrix(v)), ks, counts), Error);
}

TEST_CASE("report output") {
  EvalReport report;
  report.mpr = 71.25;
  report.precision_at = {{1, 0.25}, {5, 0.5}};
  report.pop_weighted_precision_at = {{1, 0.125}, {5, 0.375}};
  report.n_instances = 8;
  std::ostringstream values;
  print_report_values(values, report);
  CHECK(values.str() ==
        "mpr - 71.25\nprecision 1 0.25\nprecision 5 0.5\npop_weighted_precision 1 0.125\n"
        "pop_weighted_precision 5 0.375\nbeta - 0.5\nn_instances - 8\nn_skipped - 0\n");
  std::ostringstream table;
  print_report_table(table, report);
  CHECK(table.str().find("MPR: 71.250") != std::string::npos);
}
