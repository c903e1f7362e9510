#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "svwa/numerics/tensor.hpp"

namespace svwa {

/// Named tensors in definition order ("mlp1.bn.gamma", ...).
class ParamSet {
 public:
  struct Entry {
    std::string name;
    Tensor value;
  };

  /// Appends; throws StructureError on a duplicate name.
  void add(std::string name, Tensor value);

  bool contains(std::string_view name) const;
  Tensor& at(std::string_view name);
  const Tensor& at(std::string_view name) const;

  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  std::size_t scalar_count() const noexcept;

  Entry& entry(std::size_t i) { return entries_[i]; }
  const Entry& entry(std::size_t i) const { return entries_[i]; }

  auto begin() noexcept { return entries_.begin(); }
  auto end() noexcept { return entries_.end(); }
  auto begin() const noexcept { return entries_.begin(); }
  auto end() const noexcept { return entries_.end(); }

  std::vector<std::string> names() const;

  /// Entries named in `names`, in that order.
  ParamSet subset(const std::vector<std::string>& names) const;

  /// Same names, shapes and order, every value zero.
  ParamSet zeros_like() const;

  /// Same names, same shapes, same order.
  bool aligned_with(const ParamSet& other) const noexcept;

 private:
  std::vector<Entry> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Gradients share the ParamSet layout.
using GradSet = ParamSet;

/// Throws StructureError (prefixed with `context`) unless a and b are aligned.
void require_aligned(const ParamSet& a, const ParamSet& b, std::string_view context);

bool bitwise_equal(const ParamSet& a, const ParamSet& b) noexcept;

}  // namespace svwa
