#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "lrdpp/basket.hpp"
#include "lrdpp/kernel.hpp"

namespace lrdpp {

// Bijection between opaque external item ids and dense indices [0, M).
class ItemCatalog {
public:
  ItemCatalog() = default;
  explicit ItemCatalog(std::vector<std::string> ids);

  // Returns the index of `id`, inserting it at the end if absent.
  ItemIndex add(const std::string& id);

  std::optional<ItemIndex> index_of(const std::string& id) const;
  const std::string& id(ItemIndex index) const { return ids_.at(index); }
  std::span<const std::string> ids() const { return ids_; }
  std::size_t size() const { return ids_.size(); }

  bool operator==(const ItemCatalog& other) const { return ids_ == other.ids_; }

private:
  std::vector<std::string> ids_;
  std::unordered_map<std::string, ItemIndex> index_;
};

// Observed baskets over a shared catalog, with per-item occurrence counts.
class BasketDataset {
public:
  BasketDataset(std::vector<Basket> baskets, std::shared_ptr<const ItemCatalog> catalog);

  std::span<const Basket> baskets() const { return baskets_; }
  const Basket& basket(std::size_t n) const { return baskets_.at(n); }
  std::size_t size() const { return baskets_.size(); }
  bool empty() const { return baskets_.empty(); }

  const ItemCatalog& catalog() const { return *catalog_; }
  const std::shared_ptr<const ItemCatalog>& shared_catalog() const { return catalog_; }
  std::size_t num_items() const { return catalog_->size(); }

  // counts()[i] is the number of baskets containing item i.
  std::span<const std::size_t> counts() const { return counts_; }

private:
  std::vector<Basket> baskets_;
  std::shared_ptr<const ItemCatalog> catalog_;
  std::vector<std::size_t> counts_;
};

inline constexpr std::size_t kDefaultMinBasketSize = 2;

// One basket per line, comma-separated item ids, whitespace around tokens
// trimmed. Blank lines are ignored; an empty token is an error. Baskets with
// fewer than `min_basket_size` distinct items are dropped, and the catalog
// contains exactly the items of the retained baskets.
BasketDataset parse_baskets(std::istream& in, std::size_t min_basket_size = kDefaultMinBasketSize);

// Same format, but ids are resolved against an existing catalog. An id not in
// the catalog is an error.
BasketDataset parse_baskets(std::istream& in, std::shared_ptr<const ItemCatalog> catalog,
                            std::size_t min_basket_size = kDefaultMinBasketSize);

BasketDataset read_baskets(const std::filesystem::path& path,
                           std::size_t min_basket_size = kDefaultMinBasketSize);

void write_baskets(std::ostream& out, const BasketDataset& dataset);

struct DatasetSplit {
  BasketDataset train;
  BasketDataset test;
};

// Uniform random partition of the baskets. round(train_fraction * N) baskets
// go to `train`; both halves keep the full catalog.
DatasetSplit split(const BasketDataset& dataset, double train_fraction, std::uint64_t seed);

// Learned traits together with the catalog that names their rows.
struct Model {
  std::shared_ptr<const ItemCatalog> catalog;
  TraitMatrix traits;
};

inline constexpr const char* kModelMagic = "LRDPP1";

// Text header (magic, M, K, one id per line) followed by M*K little-endian
// float64 values in row-major order.
void save_model(const Model& model, const std::filesystem::path& path);
Model load_model(const std::filesystem::path& path);

void write_model(std::ostream& out, const Model& model);
Model read_model(std::istream& in);

}  // namespace lrdpp
