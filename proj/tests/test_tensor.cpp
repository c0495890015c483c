#include <doctest.h>

#include <cmath>

#include "mdsyn/errors.hpp"
#include "mdsyn/rng.hpp"
#include "mdsyn/tensor.hpp"

using namespace mdsyn;

TEST_SUITE("tensor") {

TEST_CASE("matmul identity returns the input") {
  Rng rng(1);
  Tensor m(3, 5);
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = rng.normal();
  const Tensor out = matmul(Tensor::identity(3), m);
  for (std::size_t i = 0; i < m.size(); ++i) CHECK(out[i] == doctest::Approx(m[i]).epsilon(1e-15));
}

TEST_CASE("matmul rejects mismatched shapes") {
  CHECK_THROWS_AS(matmul(Tensor(2, 3), Tensor(2, 3)), ShapeError);
}

TEST_CASE("relu clamps negatives") {
  const Tensor out = relu(Tensor::row({-1.0, 0.0, 2.0}));
  CHECK(out[0] == 0.0);
  CHECK(out[1] == 0.0);
  CHECK(out[2] == 2.0);
}

TEST_CASE("mean_rows averages columns") {
  const Tensor m(2, 2, {1.0, 3.0, 5.0, 7.0});
  const Tensor out = mean_rows(m);
  CHECK(out.at(0, 0) == doctest::Approx(3.0));
  CHECK(out.at(0, 1) == doctest::Approx(5.0));
}

TEST_CASE("max_rows takes column maxima") {
  const Tensor m(3, 2, {1.0, 9.0, 5.0, -2.0, 3.0, 4.0});
  const Tensor out = max_rows(m);
  CHECK(out.at(0, 0) == 5.0);
  CHECK(out.at(0, 1) == 9.0);
}

TEST_CASE("softmax of a zero row is uniform") {
  const Tensor out = softmax_rows(Tensor::row({0.0, 0.0}));
  CHECK(out.at(0, 0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(out.at(0, 1) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("softmax survives huge logits") {
  const Tensor out = softmax_rows(Tensor::row({1000.0, 0.0}));
  CHECK(out.all_finite());
  CHECK(out.at(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(out.at(0, 1) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("softmax of log weights recovers the weights") {
  const Tensor out = softmax_rows(Tensor::row({std::log(1.0), std::log(2.0), std::log(3.0)}));
  CHECK(out.at(0, 0) == doctest::Approx(1.0 / 6.0).epsilon(1e-13));
  CHECK(out.at(0, 1) == doctest::Approx(2.0 / 6.0).epsilon(1e-13));
  CHECK(out.at(0, 2) == doctest::Approx(3.0 / 6.0).epsilon(1e-13));
}

TEST_CASE("softmax rows sum to one within 1e-12 and stay in (0,1)") {
  Rng rng(42);
  Tensor m(50, 40);
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = rng.normal() * 10.0;
  const Tensor out = softmax_rows(m);
  for (std::size_t r = 0; r < out.rows(); ++r) {
    double sum = 0.0;
    for (std::size_t c = 0; c < out.cols(); ++c) {
      sum += out.at(r, c);
      CHECK(out.at(r, c) > 0.0);
      CHECK(out.at(r, c) < 1.0);
    }
    CHECK(std::abs(sum - 1.0) < 1e-12);
  }
}

TEST_CASE("concat keeps blocks in order") {
  const Tensor a = Tensor::row({1.0, 2.0});
  const Tensor b = Tensor::row({3.0});
  const Tensor cols = concat_cols({&a, &b});
  CHECK(cols.cols() == 3);
  CHECK(cols.at(0, 2) == 3.0);
  const Tensor c(2, 1, {1.0, 2.0});
  const Tensor d(1, 1, {9.0});
  const Tensor rows = concat_rows({&c, &d});
  CHECK(rows.rows() == 3);
  CHECK(rows.at(2, 0) == 9.0);
}

}  // TEST_SUITE
