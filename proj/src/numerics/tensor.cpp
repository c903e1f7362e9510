#include "svwa/numerics/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <sstream>
#include <utility>

#include "svwa/error.hpp"

namespace svwa {

std::size_t shape_volume(const Shape& shape) {
  std::size_t volume = 1;
  for (std::size_t d : shape) volume *= d;
  return volume;
}

std::string shape_to_string(const Shape& shape) {
  std::ostringstream out;
  out << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out << 'x';
    out << shape[i];
  }
  out << ']';
  return out.str();
}

namespace {

void round_to_float(Storage& values) {
  for (double& v : values) v = static_cast<double>(static_cast<float>(v));
}

void check_shape(const Shape& shape) {
  for (std::size_t d : shape) {
    if (d == 0) throw DimensionError("tensor dimensions must be positive, got " + shape_to_string(shape));
  }
}

}  // namespace

Tensor::Tensor(Shape shape, double fill, DType dtype)
    : shape_(std::move(shape)), data_(shape_volume(shape_), fill), dtype_(dtype) {
  check_shape(shape_);
  if (dtype_ == DType::kF32) round_to_float(data_);
}

Tensor::Tensor(Shape shape, const std::vector<double>& values, DType dtype)
    : shape_(std::move(shape)), data_(values.begin(), values.end()), dtype_(dtype) {
  check_shape(shape_);
  if (shape_volume(shape_) != data_.size()) {
    throw DimensionError("shape " + shape_to_string(shape_) + " does not match " +
                         std::to_string(data_.size()) + " values");
  }
  if (dtype_ == DType::kF32) round_to_float(data_);
}

void Tensor::cast(DType dtype) {
  dtype_ = dtype;
  if (dtype_ == DType::kF32) round_to_float(data_);
}

Tensor Tensor::reshaped(Shape shape) const& {
  return Tensor(*this).reshaped(std::move(shape));
}

Tensor Tensor::reshaped(Shape shape) && {
  if (shape_volume(shape) != data_.size()) {
    throw DimensionError("cannot reshape " + shape_to_string(shape_) + " to " + shape_to_string(shape));
  }
  Tensor out = std::move(*this);
  out.shape_ = std::move(shape);
  return out;
}

void Tensor::fill(double value) {
  std::fill(data_.begin(), data_.end(), value);
  if (dtype_ == DType::kF32) round_to_float(data_);
}

bool Tensor::all_finite() const noexcept {
  // Exponent bits all set means Inf or NaN. Integer form so the scan vectorizes.
  constexpr std::uint64_t kExponent = 0x7ff0000000000000ULL;
  std::uint64_t bad = 0;
  for (double v : data_) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    bad |= static_cast<std::uint64_t>((bits & kExponent) == kExponent);
  }
  return bad == 0;
}

bool bitwise_equal(const Tensor& a, const Tensor& b) noexcept {
  if (a.shape() != b.shape() || a.dtype() != b.dtype()) return false;
  return a.size() == 0 || std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

void require_finite(const Tensor& t, const char* where) {
  if (!t.all_finite()) throw NumericError(std::string("non-finite value in ") + where);
}

}  // namespace svwa
