#include "lrdpp/data.hpp"

#include <algorithm>
#include <bit>
#include <iterator>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

#include "lrdpp/error.hpp"

namespace lrdpp {

ItemCatalog::ItemCatalog(std::vector<std::string> ids) {
  for (auto& id : ids) {
    if (index_.count(id) != 0) {
      throw DataError("duplicate item id in catalog: " + id);
    }
    add(id);
  }
}

ItemIndex ItemCatalog::add(const std::string& id) {
  auto [it, inserted] = index_.try_emplace(id, ids_.size());
  if (inserted) {
    ids_.push_back(id);
  }
  return it->second;
}

std::optional<ItemIndex> ItemCatalog::index_of(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) {
    return std::nullopt;
  }
  return it->second;
}

Basket::Basket(std::vector<ItemIndex> items) : items_(std::move(items)) {
  std::sort(items_.begin(), items_.end());
  items_.erase(std::unique(items_.begin(), items_.end()), items_.end());
}

bool Basket::contains(ItemIndex item) const {
  return std::binary_search(items_.begin(), items_.end(), item);
}

BasketDataset::BasketDataset(std::vector<Basket> baskets, std::shared_ptr<const ItemCatalog> catalog)
    : baskets_(std::move(baskets)), catalog_(std::move(catalog)) {
  if (!catalog_) {
    throw DataError("dataset requires a catalog");
  }
  counts_.assign(catalog_->size(), 0);
  for (std::size_t n = 0; n < baskets_.size(); ++n) {
    for (ItemIndex i : baskets_[n]) {
      if (i >= counts_.size()) {
        throw DataError("basket " + std::to_string(n) + " references item " + std::to_string(i) +
                        " outside a catalog of " + std::to_string(counts_.size()));
      }
      ++counts_[i];
    }
  }
}

namespace {

std::string_view trim(std::string_view s) {
  constexpr std::string_view ws = " \t\r\n\f\v";
  auto first = s.find_first_not_of(ws);
  if (first == std::string_view::npos) {
    return {};
  }
  auto last = s.find_last_not_of(ws);
  return s.substr(first, last - first + 1);
}

// Tokens of the lines in `in`, keeping line numbers for error messages.
struct RawBasket {
  std::size_t line;
  std::vector<std::string> ids;
};

std::vector<RawBasket> tokenize(std::istream& in) {
  std::vector<RawBasket> raw;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = trim(line);
    if (view.empty()) {
      continue;
    }
    RawBasket basket{line_no, {}};
    std::size_t start = 0;
    while (true) {
      auto comma = view.find(',', start);
      auto token = trim(view.substr(start, comma == std::string_view::npos ? view.npos : comma - start));
      if (token.empty()) {
        throw DataError("line " + std::to_string(line_no) + ": empty item id");
      }
      basket.ids.emplace_back(token);
      if (comma == std::string_view::npos) {
        break;
      }
      start = comma + 1;
    }
    std::sort(basket.ids.begin(), basket.ids.end());
    basket.ids.erase(std::unique(basket.ids.begin(), basket.ids.end()), basket.ids.end());
    raw.push_back(std::move(basket));
  }
  if (in.bad()) {
    throw DataError("read error");
  }
  return raw;
}

}  // namespace

BasketDataset parse_baskets(std::istream& in, std::size_t min_basket_size) {
  auto raw = tokenize(in);
  auto catalog = std::make_shared<ItemCatalog>();
  std::vector<Basket> baskets;
  for (const auto& rb : raw) {
    if (rb.ids.size() < min_basket_size) {
      continue;
    }
    std::vector<ItemIndex> items;
    items.reserve(rb.ids.size());
    for (const auto& id : rb.ids) {
      items.push_back(catalog->add(id));
    }
    baskets.emplace_back(std::move(items));
  }
  if (baskets.empty()) {
    throw DataError("no baskets");
  }
  return BasketDataset(std::move(baskets), std::move(catalog));
}

BasketDataset parse_baskets(std::istream& in, std::shared_ptr<const ItemCatalog> catalog,
                            std::size_t min_basket_size) {
  auto raw = tokenize(in);
  std::vector<Basket> baskets;
  for (const auto& rb : raw) {
    if (rb.ids.size() < min_basket_size) {
      continue;
    }
    std::vector<ItemIndex> items;
    for (const auto& id : rb.ids) {
      auto index = catalog->index_of(id);
      if (!index) {
        throw DataError("line " + std::to_string(rb.line) + ": item id '" + id +
                        "' is not in the model catalog");
      }
      items.push_back(*index);
    }
    baskets.emplace_back(std::move(items));
  }
  if (baskets.empty()) {
    throw DataError("no baskets");
  }
  return BasketDataset(std::move(baskets), std::move(catalog));
}

BasketDataset read_baskets(const std::filesystem::path& path, std::size_t min_basket_size) {
  std::ifstream in(path);
  if (!in) {
    throw DataError("cannot open " + path.string());
  }
  return parse_baskets(in, min_basket_size);
}

void write_baskets(std::ostream& out, const BasketDataset& dataset) {
  for (const auto& basket : dataset.baskets()) {
    bool first = true;
    for (ItemIndex i : basket) {
      if (!first) {
        out << ',';
      }
      out << dataset.catalog().id(i);
      first = false;
    }
    out << '\n';
  }
}

DatasetSplit split(const BasketDataset& dataset, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw DataError("train fraction must lie in (0, 1)");
  }
  if (dataset.empty()) {
    throw DataError("cannot split an empty dataset");
  }
  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(dataset.size())));
  std::vector<Basket> train;
  std::vector<Basket> test;
  for (std::size_t r = 0; r < order.size(); ++r) {
    (r < n_train ? train : test).push_back(dataset.basket(order[r]));
  }
  return {BasketDataset(std::move(train), dataset.shared_catalog()),
          BasketDataset(std::move(test), dataset.shared_catalog())};
}

namespace {

std::size_t parse_dimension(const std::string& line, const char* name) {
  std::size_t pos = 0;
  unsigned long long value = 0;
  try {
    value = std::stoull(line, &pos);
  } catch (const std::exception&) {
    throw ModelFormatError(std::string("bad ") + name + " header: '" + line + "'");
  }
  if (pos != line.size()) {
    throw ModelFormatError(std::string("bad ") + name + " header: '" + line + "'");
  }
  return static_cast<std::size_t>(value);
}

}  // namespace

void write_model(std::ostream& out, const Model& model) {
  const auto& v = model.traits.values();
  if (!model.catalog || model.catalog->size() != model.traits.num_items()) {
    throw ModelFormatError("catalog size does not match the trait matrix");
  }
  out << kModelMagic << '\n' << v.rows() << '\n' << v.cols() << '\n';
  for (const auto& id : model.catalog->ids()) {
    out << id << '\n';
  }
  for (Eigen::Index i = 0; i < v.rows(); ++i) {
    for (Eigen::Index k = 0; k < v.cols(); ++k) {
      auto bits = std::bit_cast<std::uint64_t>(v(i, k));
      char bytes[8];
      for (int b = 0; b < 8; ++b) {
        bytes[b] = static_cast<char>((bits >> (8 * b)) & 0xffu);
      }
      out.write(bytes, 8);
    }
  }
}

Model read_model(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kModelMagic) {
    throw ModelFormatError("not a model file (expected magic " + std::string(kModelMagic) + ")");
  }
  if (!std::getline(in, line)) {
    throw ModelFormatError("missing M header");
  }
  const std::size_t m = parse_dimension(line, "M");
  if (!std::getline(in, line)) {
    throw ModelFormatError("missing K header");
  }
  const std::size_t k = parse_dimension(line, "K");
  if (m == 0 || k == 0) {
    throw ModelFormatError("model dimensions must be positive");
  }
  std::vector<std::string> ids;
  ids.reserve(m);
  for (std::size_t i = 0; i < m; ++i) {
    if (!std::getline(in, line)) {
      throw ModelFormatError("catalog truncated after " + std::to_string(i) + " of " +
                             std::to_string(m) + " ids");
    }
    ids.push_back(line);
  }
  std::string payload((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const std::size_t expected = m * k * 8;
  if (payload.size() != expected) {
    if (payload.size() % (8 * m) == 0) {
      throw ModelFormatError("shape mismatch: header says " + std::to_string(m) + "x" +
                             std::to_string(k) + " but payload holds " + std::to_string(m) + "x" +
                             std::to_string(payload.size() / (8 * m)) + " values");
    }
    throw ModelFormatError("payload has " + std::to_string(payload.size()) + " bytes, expected " +
                           std::to_string(expected) + " (truncated or corrupt)");
  }
  Eigen::MatrixXd values(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(k));
  std::size_t offset = 0;
  for (Eigen::Index i = 0; i < values.rows(); ++i) {
    for (Eigen::Index j = 0; j < values.cols(); ++j) {
      std::uint64_t bits = 0;
      for (int b = 0; b < 8; ++b) {
        bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(payload[offset + b])) << (8 * b);
      }
      offset += 8;
      values(i, j) = std::bit_cast<double>(bits);
    }
  }
  try {
    return Model{std::make_shared<const ItemCatalog>(std::move(ids)), TraitMatrix(std::move(values))};
  } catch (const Error& e) {
    throw ModelFormatError(std::string("invalid model contents: ") + e.what());
  }
}

void save_model(const Model& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw ModelFormatError("cannot write " + path.string());
  }
  write_model(out, model);
  if (!out) {
    throw ModelFormatError("write failed for " + path.string());
  }
}

Model load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ModelFormatError("cannot open " + path.string());
  }
  return read_model(in);
}

}  // namespace lrdpp
