#include "lsc/tensor.hpp"

#include <cmath>
#include <numeric>

#include "lsc/common.hpp"

namespace lsc {

std::string shape_str(const Shape& s) {
  std::string out = "(";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += ", ";
    out += std::to_string(s[i]);
  }
  out += ")";
  return out;
}

namespace {
std::size_t product(const Shape& s) {
  std::size_t n = 1;
  for (auto d : s) n *= d;
  return n;
}
}  // namespace

Tensor::Tensor(Shape shape) : shape_(std::move(shape)), data_(product(shape_), 0.0) {}

Tensor::Tensor(Shape shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (data_.size() != product(shape_)) {
    throw DimensionError("tensor data length " + std::to_string(data_.size()) +
                         " does not match shape " + shape_str(shape_));
  }
}

void Tensor::fill(double v) {
  for (auto& x : data_) x = v;
}

bool Tensor::all_finite() const {
  for (double x : data_) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

double Tensor::abs_max() const {
  double m = 0.0;
  for (double x : data_) m = std::max(m, std::fabs(x));
  return m;
}

void Tensor::axpy(double s, const Tensor& other) {
  if (!same_shape(other)) {
    throw DimensionError("axpy shape mismatch: " + shape_str(shape_) + " vs " +
                         shape_str(other.shape_));
  }
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += s * other.data_[i];
}

}  // namespace lsc
