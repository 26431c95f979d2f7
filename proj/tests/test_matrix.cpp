#include <doctest.h>

#include <limits>

#include "helpers.hpp"
#include "ldahash/errors.hpp"
#include "ldahash/matrix.hpp"

using namespace ldahash;
using test_support::bitwise_equal;
using test_support::random_matrix;

TEST_CASE("matrix construction enforces shape and finiteness") {
    CHECK_THROWS_AS(Matrix(0, 3), DimensionError);
    CHECK_THROWS_AS(Matrix(2, 2, {1.0, 2.0, 3.0}), DimensionError);
    CHECK_THROWS_AS(Matrix(1, 2, {1.0, std::numeric_limits<double>::quiet_NaN()}),
                    NumericError);
    CHECK_THROWS_AS(Matrix(1, 1, {std::numeric_limits<double>::infinity()}), NumericError);
    const Matrix m = Matrix::from_rows({{1.0, 2.0}, {3.0, 4.0}});
    CHECK(m(0, 1) == 2.0);
    CHECK(m(1, 0) == 3.0);
}

TEST_CASE("matmul small example") {
    const Matrix a = Matrix::from_rows({{1, 2}, {3, 4}});
    const Matrix b = Matrix::from_rows({{5, 6}, {7, 8}});
    const Matrix c = matmul(a, b);
    CHECK(c(0, 0) == 19.0);
    CHECK(c(0, 1) == 22.0);
    CHECK(c(1, 0) == 43.0);
    CHECK(c(1, 1) == 50.0);
    CHECK_THROWS_AS(matmul(a, Matrix(3, 2)), DimensionError);
}

TEST_CASE("parallel kernels are bit-identical to serial references") {
    Rng rng(11);
    for (int round = 0; round < 5; ++round) {
        const std::size_t m = 1 + rng.bounded(40);
        const std::size_t k = 1 + rng.bounded(40);
        const std::size_t n = 1 + rng.bounded(40);
        const Matrix a = random_matrix(rng, m, k);
        const Matrix b = random_matrix(rng, k, n);
        CHECK(bitwise_equal(matmul(a, b), serial::matmul(a, b)));

        const Matrix a2 = random_matrix(rng, k, m);
        CHECK(bitwise_equal(matmul_at_b(a2, b), serial::matmul_at_b(a2, b)));

        const Matrix b2 = random_matrix(rng, n, k);
        CHECK(bitwise_equal(matmul_a_bt(a, b2), serial::matmul_a_bt(a, b2)));
    }
}

TEST_CASE("transposed kernels match explicit transpose products") {
    Rng rng(12);
    const Matrix a = random_matrix(rng, 7, 5);
    const Matrix b = random_matrix(rng, 7, 6);
    CHECK(bitwise_equal(matmul_at_b(a, b), matmul(transpose(a), b)));

    const Matrix c = random_matrix(rng, 5, 9);
    const Matrix d = random_matrix(rng, 4, 9);
    CHECK(test_support::rel_diff(matmul_a_bt(c, d), matmul(c, transpose(d))) < 1e-15);
}

TEST_CASE("elementwise helpers") {
    const Matrix a = Matrix::from_rows({{1, -2}, {3, 4}});
    const Matrix b = Matrix::from_rows({{10, 20}, {30, 40}});
    CHECK((a + b)(1, 1) == 44.0);
    CHECK((b - a)(0, 1) == 22.0);
    CHECK(scaled(a, 2.0)(1, 0) == 6.0);
    CHECK(trace(a) == 5.0);
    CHECK(max_abs(a) == 4.0);
    CHECK(frobenius_norm(Matrix::from_rows({{3, 4}})) == doctest::Approx(5.0));
    Matrix c = a;
    add_scaled_in_place(c, b, 0.1);
    CHECK(c(0, 0) == doctest::Approx(2.0));

    CHECK(max_asymmetry(Matrix::from_rows({{1, 2}, {2.5, 1}})) == doctest::Approx(0.5));
    CHECK(is_symmetric(Matrix::from_rows({{1, 2}, {2, 1}}), 0.0));
    CHECK_FALSE(is_symmetric(Matrix::from_rows({{1, 2}, {2.5, 1}}), 1e-9));
}

TEST_CASE("row and column means") {
    const Matrix a = Matrix::from_rows({{1, 3}, {5, 7}});
    const auto rows = row_means(a);
    CHECK(rows[0] == doctest::Approx(2.0));
    CHECK(rows[1] == doctest::Approx(6.0));
    const auto cols = col_means(a);
    CHECK(cols[0] == doctest::Approx(3.0));
    CHECK(cols[1] == doctest::Approx(5.0));
}
