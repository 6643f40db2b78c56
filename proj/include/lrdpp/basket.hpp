#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace lrdpp {

using ItemIndex = std::size_t;

// A set of items, stored as strictly increasing dense indices.
class Basket {
public:
  Basket() = default;
  // Sorts and deduplicates.
  explicit Basket(std::vector<ItemIndex> items);
  Basket(std::initializer_list<ItemIndex> items) : Basket(std::vector<ItemIndex>(items)) {}

  std::span<const ItemIndex> items() const { return items_; }
  std::size_t size() const { return items_.size(); }
  bool empty() const { return items_.empty(); }
  bool contains(ItemIndex item) const;
  ItemIndex operator[](std::size_t i) const { return items_[i]; }

  auto begin() const { return items_.begin(); }
  auto end() const { return items_.end(); }

  bool operator==(const Basket& other) const = default;

private:
  std::vector<ItemIndex> items_;
};

}  // namespace lrdpp
