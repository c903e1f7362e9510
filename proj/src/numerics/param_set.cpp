#include "svwa/numerics/param_set.hpp"

#include <utility>

#include "svwa/error.hpp"

namespace svwa {

void ParamSet::add(std::string name, Tensor value) {
  if (index_.contains(name)) throw StructureError("duplicate parameter name '" + name + "'");
  index_.emplace(name, entries_.size());
  entries_.push_back({std::move(name), std::move(value)});
}

bool ParamSet::contains(std::string_view name) const {
  return index_.contains(std::string(name));
}

Tensor& ParamSet::at(std::string_view name) {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) throw StructureError("unknown parameter '" + std::string(name) + "'");
  return entries_[it->second].value;
}

const Tensor& ParamSet::at(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) throw StructureError("unknown parameter '" + std::string(name) + "'");
  return entries_[it->second].value;
}

std::size_t ParamSet::scalar_count() const noexcept {
  std::size_t n = 0;
  for (const auto& e : entries_) n += e.value.size();
  return n;
}

std::vector<std::string> ParamSet::names() const {
  std::vector<std::string> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) out.push_back(e.name);
  return out;
}

ParamSet ParamSet::subset(const std::vector<std::string>& names) const {
  ParamSet out;
  for (const auto& name : names) out.add(name, at(name));
  return out;
}

ParamSet ParamSet::zeros_like() const {
  ParamSet out;
  for (const auto& e : entries_) out.add(e.name, Tensor(e.value.shape(), 0.0, e.value.dtype()));
  return out;
}

bool ParamSet::aligned_with(const ParamSet& other) const noexcept {
  if (entries_.size() != other.entries_.size()) return false;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].name != other.entries_[i].name) return false;
    if (entries_[i].value.shape() != other.entries_[i].value.shape()) return false;
  }
  return true;
}

void require_aligned(const ParamSet& a, const ParamSet& b, std::string_view context) {
  if (a.aligned_with(b)) return;
  std::string detail;
  if (a.size() != b.size()) {
    detail = std::to_string(a.size()) + " vs " + std::to_string(b.size()) + " entries";
  } else {
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (a.entry(i).name != b.entry(i).name) {
        detail = "'" + a.entry(i).name + "' vs '" + b.entry(i).name + "'";
        break;
      }
      if (a.entry(i).value.shape() != b.entry(i).value.shape()) {
        detail = "'" + a.entry(i).name + "' shape " + shape_to_string(a.entry(i).value.shape()) +
                 " vs " + shape_to_string(b.entry(i).value.shape());
        break;
      }
    }
  }
  throw StructureError(std::string(context) + ": parameter sets are not aligned (" + detail + ")");
}

bool bitwise_equal(const ParamSet& a, const ParamSet& b) noexcept {
  if (!a.aligned_with(b)) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!bitwise_equal(a.entry(i).value, b.entry(i).value)) return false;
  }
  return true;
}

}  // namespace svwa
