#include "densiwae/autodiff/tensor.hpp"

#include <Eigen/Core>

#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>

#include "densiwae/error.hpp"

namespace densiwae {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMat>;
using MutMap = Eigen::Map<RowMat>;

std::size_t product(const std::vector<std::size_t>& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

ConstMap view(const Tensor& t) {
  return ConstMap(t.values().data(), static_cast<Eigen::Index>(t.rows()),
                  static_cast<Eigen::Index>(t.cols()));
}

}  // namespace

Tensor::Tensor(std::vector<std::size_t> shape, double fill)
    : shape_(std::move(shape)), data_(product(shape_), fill) {}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (product(shape_) != data_.size()) {
    throw ShapeError("tensor data length " + std::to_string(data_.size()) +
                     " does not match shape " + shape_string());
  }
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols, double fill) {
  return Tensor({rows, cols}, fill);
}

Tensor Tensor::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  std::vector<std::vector<double>> v;
  for (const auto& r : rows) v.emplace_back(r);
  return from_rows(v);
}

Tensor Tensor::from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) return matrix(0, 0);
  const std::size_t c = rows.front().size();
  Tensor t = matrix(rows.size(), c);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != c) throw ShapeError("ragged rows in Tensor::from_rows");
    std::copy(rows[i].begin(), rows[i].end(), t.row(i).begin());
  }
  return t;
}

std::size_t Tensor::rows() const {
  if (shape_.size() == 2) return shape_[0];
  return shape_.empty() ? 0 : 1;
}

std::size_t Tensor::cols() const {
  if (shape_.size() == 2) return shape_[1];
  if (shape_.size() == 1) return shape_[0];
  return 0;
}

double Tensor::item() const {
  if (data_.size() != 1) throw ShapeError("item() on tensor of shape " + shape_string());
  return data_[0];
}

bool Tensor::all_finite() const {
  for (double v : data_)
    if (!std::isfinite(v)) return false;
  return true;
}

std::string Tensor::shape_string() const {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape_.size(); ++i) os << (i ? "x" : "") << shape_[i];
  os << ']';
  return os.str();
}

Tensor Tensor::transposed() const {
  Tensor t = matrix(cols(), rows());
  for (std::size_t i = 0; i < rows(); ++i)
    for (std::size_t j = 0; j < cols(); ++j) t(j, i) = (*this)(i, j);
  return t;
}

Tensor Tensor::select_rows(std::span<const std::size_t> idx) const {
  Tensor t = matrix(idx.size(), cols());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    auto src = row(idx[i]);
    std::copy(src.begin(), src.end(), t.row(i).begin());
  }
  return t;
}

Tensor& Tensor::operator+=(const Tensor& o) {
  if (o.size() != size()) throw ShapeError("+= shape mismatch " + shape_string() + " vs " + o.shape_string());
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
  return *this;
}

Tensor& Tensor::operator-=(const Tensor& o) {
  if (o.size() != size()) throw ShapeError("-= shape mismatch " + shape_string() + " vs " + o.shape_string());
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
  return *this;
}

Tensor& Tensor::operator*=(double s) {
  for (double& v : data_) v *= s;
  return *this;
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.cols() != b.rows())
    throw ShapeError("matmul " + a.shape_string() + " x " + b.shape_string());
  Tensor out = Tensor::matrix(a.rows(), b.cols());
  if (out.empty() || a.cols() == 0) return out;
  MutMap(out.values().data(), static_cast<Eigen::Index>(out.rows()),
         static_cast<Eigen::Index>(out.cols())).noalias() = view(a) * view(b);
  return out;
}

Tensor matmul_bt(const Tensor& a, const Tensor& b) {
  if (a.cols() != b.cols())
    throw ShapeError("matmul_bt " + a.shape_string() + " x " + b.shape_string() + "^T");
  Tensor out = Tensor::matrix(a.rows(), b.rows());
  if (out.empty() || a.cols() == 0) return out;
  MutMap(out.values().data(), static_cast<Eigen::Index>(out.rows()),
         static_cast<Eigen::Index>(out.cols())).noalias() = view(a) * view(b).transpose();
  return out;
}

Tensor matmul_at(const Tensor& a, const Tensor& b) {
  if (a.rows() != b.rows())
    throw ShapeError("matmul_at " + a.shape_string() + "^T x " + b.shape_string());
  Tensor out = Tensor::matrix(a.cols(), b.cols());
  if (out.empty() || a.rows() == 0) return out;
  MutMap(out.values().data(), static_cast<Eigen::Index>(out.rows()),
         static_cast<Eigen::Index>(out.cols())).noalias() = view(a).transpose() * view(b);
  return out;
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

double distance(std::span<const double> a, std::span<const double> b) {
  return std::sqrt(squared_distance(a, b));
}

double l1_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return s;
}

}  // namespace densiwae
