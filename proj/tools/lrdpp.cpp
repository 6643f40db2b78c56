#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lrdpp/bench.hpp"
#include "lrdpp/check.hpp"
#include "lrdpp/conditioning.hpp"
#include "lrdpp/data.hpp"
#include "lrdpp/error.hpp"
#include "lrdpp/evaluation.hpp"
#include "lrdpp/likelihood.hpp"
#include "lrdpp/optimizer.hpp"

namespace fs = std::filesystem;
using namespace lrdpp;

namespace {

struct TrainOptions {
  std::string data;
  std::string out;
  std::string trace;
  double test_fraction = 0.3;
  TrainConfig config;
};

struct PredictOptions {
  std::string model;
  std::string basket;
  std::size_t top = 10;
};

struct EvaluateOptions {
  std::string model;
  std::string data;
  std::string train_data;
  std::vector<std::size_t> ks{1, 5, 10, 20};
  double beta_pop = kDefaultPopularityExponent;
  std::uint64_t seed = 0;
};

class ConfigPrinter {
 public:
  explicit ConfigPrinter(std::string command) { out_ << "config command " << command << '\n'; }

  template <typename T>
  ConfigPrinter& operator()(const std::string& key, const T& value) {
    out_ << "config " << key << ' ' << value << '\n';
    return *this;
  }

  void flush() { std::cerr << out_.str() << std::flush; }

 private:
  std::ostringstream out_;
};

std::string join(const std::vector<std::size_t>& values) {
  std::string s;
  for (std::size_t i = 0; i < values.size(); ++i) {
    s += (i ? "," : "") + std::to_string(values[i]);
  }
  return s;
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw Error("cannot open " + path.string() + " for writing");
  }
  return out;
}

int run_train(const TrainOptions& o) {
  const fs::path out(o.out);
  const fs::path trace_path = o.trace.empty() ? fs::path(o.out + ".trace") : fs::path(o.trace);
  const TrainConfig& cfg = o.config;

  const BasketDataset all = read_baskets(o.data);
  DatasetSplit parts{all, BasketDataset({}, all.shared_catalog())};
  if (o.test_fraction > 0.0) {
    parts = split(all, 1.0 - o.test_fraction, cfg.seed);
  }

  ConfigPrinter("train")("data", o.data)("out", o.out)("trace", trace_path.string())(
      "test_fraction", o.test_fraction)("num_items", all.num_items())("num_baskets", all.size())(
      "train_baskets", parts.train.size())("test_baskets", parts.test.size())("k", cfg.num_traits)(
      "alpha", cfg.alpha)("epsilon0", cfg.epsilon0)("beta", cfg.beta)("batch", cfg.batch_size)(
      "t_anneal", cfg.resolved_horizon(parts.train.size()))("delta", cfg.delta)("max_iters", cfg.max_iters)(
      "seed", cfg.seed)("init_scale", cfg.init_scale)("threads", cfg.threads)
      .flush();

  EpochObserver observer;
  if (!parts.test.empty()) {
    observer = [&parts](const TraitMatrix& v) -> std::optional<double> {
      const HeldOutLikelihood ll = average_log_likelihood(v, parts.test.baskets());
      if (ll.evaluated == 0) return std::nullopt;
      return ll.mean;
    };
  }

  auto write_trace = [&](const TrainTrace& trace) {
    auto f = open_output(trace_path);
    f << std::setprecision(17);
    for (const auto& r : trace.epochs) {
      f << "epoch " << r.epoch << " lr " << r.learning_rate << " objective " << r.objective;
      if (r.held_out) f << " test_ll " << *r.held_out;
      f << '\n';
    }
  };

  TrainResult result = [&] {
    try {
      return train(parts.train, cfg, observer);
    } catch (const TrainingAborted& e) {
      write_trace(e.trace());
      throw;
    } catch (const TrainingError& e) {
      const std::string what = e.what();
      if (what.find("K >=") != std::string::npos) {
        throw TrainingError(what + "\nRerun with a larger --k.");
      }
      throw;
    }
  }();

  save_model({all.shared_catalog(), result.traits}, out);
  write_trace(result.trace);
  {
    auto f = open_output(o.out + ".train");
    write_baskets(f, parts.train);
  }
  if (!parts.test.empty()) {
    auto f = open_output(o.out + ".test");
    write_baskets(f, parts.test);
  }

  const auto& t = result.trace;
  std::cout << "epochs " << t.epochs.size() << " iterations " << t.iterations_run << " converged "
            << (t.converged ? "yes" : "no") << " objective "
            << (t.epochs.empty() ? t.initial_objective : t.epochs.back().objective) << '\n';
  return 0;
}

Basket parse_id_list(const std::string& text, const ItemCatalog& catalog) {
  std::vector<ItemIndex> items;
  std::vector<std::string> unknown;
  std::stringstream ss(text);
  std::string id;
  while (std::getline(ss, id, ',')) {
    const auto first = id.find_first_not_of(" \t");
    if (first == std::string::npos) continue;
    id = id.substr(first, id.find_last_not_of(" \t") - first + 1);
    if (auto i = catalog.index_of(id)) {
      items.push_back(*i);
    } else {
      unknown.push_back(id);
    }
  }
  if (!unknown.empty()) {
    std::string msg = "unknown item id(s):";
    for (const auto& u : unknown) msg += " " + u;
    throw DataError(msg);
  }
  return Basket(std::move(items));
}

int run_predict(const PredictOptions& o) {
  const Model model = load_model(o.model);
  ConfigPrinter("predict")("model", o.model)("basket", o.basket)("top", o.top)(
      "num_items", model.traits.num_items())("k", model.traits.num_traits())
      .flush();
  const Basket basket = parse_id_list(o.basket, *model.catalog);
  const auto ranked = complete_basket(model.traits, basket, o.top);
  std::cout << std::setprecision(10);
  for (const auto& s : ranked) {
    std::cout << model.catalog->id(s.item) << '\t' << s.probability << '\n';
  }
  return 0;
}

BasketDataset read_with_catalog(const std::string& path, const Model& model) {
  std::ifstream in(path);
  if (!in) {
    throw DataError("cannot open " + path);
  }
  try {
    return parse_baskets(in, model.catalog);
  } catch (const DataError& e) {
    throw DataError(path + ": catalog mismatch with model: " + e.what());
  }
}

int run_evaluate(const EvaluateOptions& o) {
  const Model model = load_model(o.model);
  const BasketDataset test = read_with_catalog(o.data, model);
  std::vector<std::size_t> counts;
  std::string counts_source;
  if (!o.train_data.empty()) {
    const BasketDataset train_set = read_with_catalog(o.train_data, model);
    counts.assign(train_set.counts().begin(), train_set.counts().end());
    counts_source = o.train_data;
  } else {
    counts.assign(test.counts().begin(), test.counts().end());
    counts_source = o.data + " (no --train-data given)";
  }
  ConfigPrinter("evaluate")("model", o.model)("data", o.data)("popularity_counts", counts_source)(
      "ks", join(o.ks))("beta_pop", o.beta_pop)("seed", o.seed)("num_items", model.traits.num_items())(
      "k", model.traits.num_traits())("test_baskets", test.size())
      .flush();

  const auto instances = make_instances(test, o.seed);
  const EvalReport report =
      evaluate(instances, model.traits.num_items(), low_rank_scorer(model.traits), o.ks, counts, o.beta_pop);
  const HeldOutLikelihood ll = average_log_likelihood(model.traits, test.baskets());

  print_report_table(std::cout, report);
  std::cout << '\n';
  print_report_values(std::cout, report);
  std::cout << std::setprecision(10) << "test_ll - " << ll.mean << '\n'
            << "test_ll_zero_probability - " << ll.zero_probability << '\n';
  return 0;
}

int run_check(std::uint64_t seed, std::size_t trials) {
  ConfigPrinter("check")("seed", seed)("trials", trials).flush();
  check::CheckOptions options;
  options.seed = seed;
  options.trials = trials;
  const auto results = check::run_all(options);
  check::print_results(std::cout, results);
  int status = 0;
  for (const auto& r : results) {
    if (!r.passed()) {
      std::cerr << "property " << r.name << " failed; reproduce with --seed " << *r.first_failing_seed
                << " --trials 1\n";
      status = 1;
    }
  }
  return status;
}

int run_bench(const bench::BenchOptions& o) {
  ConfigPrinter("bench")("m_values", join(o.num_items))("k", o.num_traits)("basket_size", o.basket_size)(
      "trials", o.trials)("seed", o.seed)
      .flush();
  const auto rows = bench::run(o);
  bench::print_table(std::cout, rows);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Low-rank DPP basket completion"};
  app.require_subcommand(1);
  unsigned threads = 1;
  app.add_option("--threads", threads, "Worker threads for gradient evaluation")->check(CLI::PositiveNumber);

  TrainOptions train_opts;
  auto* train_cmd = app.add_subcommand("train", "Fit a model on a basket file");
  auto& cfg = train_opts.config;
  train_cmd->add_option("--data", train_opts.data, "Basket file, one comma-separated basket per line")
      ->required()
      ->check(CLI::ExistingFile);
  train_cmd->add_option("--out", train_opts.out, "Model output path")->required();
  train_cmd->add_option("--trace", train_opts.trace, "Trace output path (default <out>.trace)");
  train_cmd->add_option("--k", cfg.num_traits, "Number of latent traits")->capture_default_str();
  train_cmd->add_option("--alpha", cfg.alpha, "Regularization strength")->capture_default_str();
  train_cmd->add_option("--epsilon0", cfg.epsilon0, "Initial learning rate")->capture_default_str();
  train_cmd->add_option("--beta", cfg.beta, "Momentum")->capture_default_str();
  train_cmd->add_option("--batch", cfg.batch_size, "Mini-batch size")->capture_default_str();
  train_cmd->add_option("--t-anneal", cfg.anneal_horizon, "Annealing horizon; 0 picks 10 epochs")
      ->capture_default_str();
  train_cmd->add_option("--delta", cfg.delta, "Convergence threshold")->capture_default_str();
  train_cmd->add_option("--max-iters", cfg.max_iters, "Iteration cap")->capture_default_str();
  train_cmd->add_option("--seed", cfg.seed, "Seed for split, init and shuffling")->capture_default_str();
  train_cmd->add_option("--init-scale", cfg.init_scale, "Std dev of the initial traits")->capture_default_str();
  train_cmd->add_option("--test-fraction", train_opts.test_fraction, "Held-out fraction; 0 trains on all")
      ->check(CLI::Range(0.0, 0.999))
      ->capture_default_str();

  PredictOptions predict_opts;
  auto* predict_cmd = app.add_subcommand("predict", "Rank the next item for a basket");
  predict_cmd->add_option("--model", predict_opts.model, "Model file")->required()->check(CLI::ExistingFile);
  predict_cmd->add_option("--basket", predict_opts.basket, "Comma-separated item ids");
  predict_cmd->add_option("--top", predict_opts.top, "Number of items to print")->capture_default_str();

  EvaluateOptions eval_opts;
  auto* eval_cmd = app.add_subcommand("evaluate", "Score a model on held-out baskets");
  eval_cmd->add_option("--model", eval_opts.model, "Model file")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--data", eval_opts.data, "Held-out basket file")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--train-data", eval_opts.train_data, "Training baskets for popularity counts")
      ->check(CLI::ExistingFile);
  eval_cmd->add_option("--ks", eval_opts.ks, "Cutoffs for precision@k")->delimiter(',')->capture_default_str();
  eval_cmd->add_option("--beta-pop", eval_opts.beta_pop, "Popularity exponent")->capture_default_str();
  eval_cmd->add_option("--seed", eval_opts.seed, "Seed for choosing held-out items")->capture_default_str();

  std::uint64_t check_seed = 1;
  std::size_t check_trials = 50;
  auto* check_cmd = app.add_subcommand("check", "Compare fast routines against brute force");
  check_cmd->add_option("--seed", check_seed)->capture_default_str();
  check_cmd->add_option("--trials", check_trials, "Trials per property")->capture_default_str();

  bench::BenchOptions bench_opts;
  auto* bench_cmd = app.add_subcommand("bench", "Time low-rank against full-rank prediction");
  bench_cmd->add_option("--m-values", bench_opts.num_items)->delimiter(',')->capture_default_str();
  bench_cmd->add_option("--k", bench_opts.num_traits)->capture_default_str();
  bench_cmd->add_option("--basket-size", bench_opts.basket_size)->capture_default_str();
  bench_cmd->add_option("--trials", bench_opts.trials)->capture_default_str();
  bench_cmd->add_option("--seed", bench_opts.seed)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  cfg.threads = threads;

  try {
    if (*train_cmd) return run_train(train_opts);
    if (*predict_cmd) return run_predict(predict_opts);
    if (*eval_cmd) return run_evaluate(eval_opts);
    if (*check_cmd) return run_check(check_seed, check_trials);
    if (*bench_cmd) return run_bench(bench_opts);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
