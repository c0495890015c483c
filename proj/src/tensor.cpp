#include "mdsyn/tensor.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>

#include "mdsyn/errors.hpp"

namespace mdsyn {

namespace {

using EigenRowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const EigenRowMajor>;
using MutMap = Eigen::Map<EigenRowMajor>;

[[noreturn]] void shape_fail(const char* op, const Tensor& a, const Tensor& b) {
  throw ShapeError(std::string(op) + ": incompatible shapes " + a.shape_str() + " and " + b.shape_str());
}

}  // namespace

Tensor::Tensor(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), data_(std::move(values)) {
  if (data_.size() != rows_ * cols_) {
    throw ShapeError("Tensor: value count " + std::to_string(data_.size()) + " does not match " + shape_str());
  }
}

Tensor Tensor::row(std::vector<double> v) {
  const std::size_t n = v.size();
  return Tensor(1, n, std::move(v));
}

Tensor Tensor::identity(std::size_t n) {
  Tensor t(n, n);
  for (std::size_t i = 0; i < n; ++i) t.at(i, i) = 1.0;
  return t;
}

Tensor Tensor::full(std::size_t rows, std::size_t cols, double value) {
  Tensor t(rows, cols);
  std::fill(t.data_.begin(), t.data_.end(), value);
  return t;
}

bool Tensor::all_finite() const {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

std::string Tensor::shape_str() const {
  return "(" + std::to_string(rows_) + "x" + std::to_string(cols_) + ")";
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.cols() != b.rows()) shape_fail("matmul", a, b);
  Tensor out(a.rows(), b.cols());
  ConstMap ma(a.data(), static_cast<Eigen::Index>(a.rows()), static_cast<Eigen::Index>(a.cols()));
  ConstMap mb(b.data(), static_cast<Eigen::Index>(b.rows()), static_cast<Eigen::Index>(b.cols()));
  MutMap mo(out.data(), static_cast<Eigen::Index>(out.rows()), static_cast<Eigen::Index>(out.cols()));
  mo.noalias() = ma * mb;
  return out;
}

Tensor transpose(const Tensor& a) {
  Tensor out(a.cols(), a.rows());
  ConstMap ma(a.data(), static_cast<Eigen::Index>(a.rows()), static_cast<Eigen::Index>(a.cols()));
  MutMap mo(out.data(), static_cast<Eigen::Index>(out.rows()), static_cast<Eigen::Index>(out.cols()));
  mo = ma.transpose();
  return out;
}

Tensor add(const Tensor& a, const Tensor& b) {
  if (!a.same_shape(b)) shape_fail("add", a, b);
  Tensor out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += b[i];
  return out;
}

Tensor sub(const Tensor& a, const Tensor& b) {
  if (!a.same_shape(b)) shape_fail("sub", a, b);
  Tensor out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= b[i];
  return out;
}

Tensor mul_elem(const Tensor& a, const Tensor& b) {
  if (!a.same_shape(b)) shape_fail("mul_elem", a, b);
  Tensor out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= b[i];
  return out;
}

Tensor scale(const Tensor& a, double s) {
  Tensor out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= s;
  return out;
}

Tensor relu(const Tensor& a) {
  Tensor out = a;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (out[i] < 0.0) out[i] = 0.0;
  }
  return out;
}

Tensor gelu(const Tensor& a) {
  Tensor out = a;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double x = out[i];
    out[i] = 0.5 * x * (1.0 + std::erf(x * 0.70710678118654752440));
  }
  return out;
}

Tensor add_rowvec(const Tensor& x, const Tensor& bias) {
  if (bias.rows() != 1 || bias.cols() != x.cols()) shape_fail("add_rowvec", x, bias);
  Tensor out = x;
  for (std::size_t r = 0; r < x.rows(); ++r) {
    for (std::size_t c = 0; c < x.cols(); ++c) out.at(r, c) += bias.at(0, c);
  }
  return out;
}

Tensor concat_cols(const std::vector<const Tensor*>& parts) {
  if (parts.empty()) throw ShapeError("concat_cols: no inputs");
  const std::size_t rows = parts[0]->rows();
  std::size_t cols = 0;
  for (const Tensor* p : parts) {
    if (p->rows() != rows) shape_fail("concat_cols", *parts[0], *p);
    cols += p->cols();
  }
  Tensor out(rows, cols);
  std::size_t offset = 0;
  for (const Tensor* p : parts) {
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < p->cols(); ++c) out.at(r, offset + c) = p->at(r, c);
    }
    offset += p->cols();
  }
  return out;
}

Tensor concat_rows(const std::vector<const Tensor*>& parts) {
  if (parts.empty()) throw ShapeError("concat_rows: no inputs");
  const std::size_t cols = parts[0]->cols();
  std::size_t rows = 0;
  for (const Tensor* p : parts) {
    if (p->cols() != cols) shape_fail("concat_rows", *parts[0], *p);
    rows += p->rows();
  }
  Tensor out(rows, cols);
  std::size_t offset = 0;
  for (const Tensor* p : parts) {
    std::copy(p->data(), p->data() + p->size(), out.data() + offset * cols);
    offset += p->rows();
  }
  return out;
}

Tensor mean_rows(const Tensor& a) {
  if (a.rows() == 0) throw ShapeError("mean_rows: empty input");
  Tensor out(1, a.cols());
  for (std::size_t r = 0; r < a.rows(); ++r) {
    for (std::size_t c = 0; c < a.cols(); ++c) out.at(0, c) += a.at(r, c);
  }
  const double inv = 1.0 / static_cast<double>(a.rows());
  for (std::size_t c = 0; c < a.cols(); ++c) out.at(0, c) *= inv;
  return out;
}

Tensor max_rows(const Tensor& a) {
  if (a.rows() == 0) throw ShapeError("max_rows: empty input");
  Tensor out(1, a.cols());
  for (std::size_t c = 0; c < a.cols(); ++c) {
    double m = a.at(0, c);
    for (std::size_t r = 1; r < a.rows(); ++r) m = std::max(m, a.at(r, c));
    out.at(0, c) = m;
  }
  return out;
}

Tensor softmax_rows(const Tensor& a) {
  Tensor out = a;
  for (std::size_t r = 0; r < a.rows(); ++r) {
    double m = out.at(r, 0);
    for (std::size_t c = 1; c < a.cols(); ++c) m = std::max(m, out.at(r, c));
    double sum = 0.0;
    for (std::size_t c = 0; c < a.cols(); ++c) {
      const double e = std::exp(out.at(r, c) - m);
      out.at(r, c) = e;
      sum += e;
    }
    const double inv = 1.0 / sum;
    for (std::size_t c = 0; c < a.cols(); ++c) out.at(r, c) *= inv;
  }
  return out;
}

double dot(const Tensor& a, const Tensor& b) {
  if (a.size() != b.size()) shape_fail("dot", a, b);
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double frobenius_norm(const Tensor& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * a[i];
  return std::sqrt(s);
}

}  // namespace mdsyn
