#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace mdsyn {

// Dense row-major matrix of doubles. Vectors are 1xN or Nx1 tensors.
class Tensor {
public:
  Tensor() = default;
  Tensor(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}
  Tensor(std::size_t rows, std::size_t cols, std::vector<double> values);

  static Tensor row(std::vector<double> v);
  static Tensor identity(std::size_t n);
  static Tensor full(std::size_t rows, std::size_t cols, double value);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& at(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double at(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::vector<double>& values() { return data_; }
  const std::vector<double>& values() const { return data_; }

  bool same_shape(const Tensor& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }
  bool all_finite() const;
  std::string shape_str() const;

private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Primitives. All of them validate shapes and throw ShapeError on mismatch.
Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul_elem(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double s);
Tensor relu(const Tensor& a);
Tensor gelu(const Tensor& a);
// x is NxC, bias is 1xC, added to every row.
Tensor add_rowvec(const Tensor& x, const Tensor& bias);
Tensor concat_cols(const std::vector<const Tensor*>& parts);
Tensor concat_rows(const std::vector<const Tensor*>& parts);
// Reduce over rows: NxC -> 1xC.
Tensor mean_rows(const Tensor& a);
Tensor max_rows(const Tensor& a);
// Row-wise softmax with max subtraction.
Tensor softmax_rows(const Tensor& a);

double dot(const Tensor& a, const Tensor& b);
double frobenius_norm(const Tensor& a);

}  // namespace mdsyn
