#include <doctest.h>

#include <cmath>
#include <random>

#include "fpdetect/matrix.hpp"

using namespace fpdetect;

TEST_CASE("2x2 inverse matches the closed form") {
    Matrix a(2, 2);
    a(0, 0) = 4;
    a(0, 1) = 7;
    a(1, 0) = 2;
    a(1, 1) = 6;
    const Matrix inv = invert(a);
    CHECK(inv(0, 0) == doctest::Approx(0.6));
    CHECK(inv(0, 1) == doctest::Approx(-0.7));
    CHECK(inv(1, 0) == doctest::Approx(-0.2));
    CHECK(inv(1, 1) == doctest::Approx(0.4));
}

TEST_CASE("A * inv(A) = I for random SPD matrices") {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 10; ++trial) {
        const std::size_t n = 3 + trial % 4;
        Matrix b(n, n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) b(i, j) = u(rng);
        Matrix a = b * b.transposed();
        for (std::size_t i = 0; i < n; ++i) a(i, i) += n; // well-conditioned
        const Matrix prod = a * invert(a);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                CHECK(prod(i, j) == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-8));
    }
}

TEST_CASE("singular matrix raises") {
    Matrix a(2, 2);
    a(0, 0) = 1;
    a(0, 1) = 2;
    a(1, 0) = 2;
    a(1, 1) = 4;
    CHECK_THROWS_AS(invert(a), SingularMatrixError);
}

TEST_CASE("log determinant matches the 2x2 closed form") {
    Matrix a(2, 2);
    a(0, 0) = 1.0;
    a(0, 1) = 0.9;
    a(1, 0) = 0.9;
    a(1, 1) = 1.0;
    const LogDet ld = log_det(a);
    CHECK(ld.sign == 1);
    CHECK(ld.log_abs == doctest::Approx(std::log(0.19)).epsilon(1e-12));
}

TEST_CASE("negative determinant keeps the sign") {
    Matrix a(2, 2);
    a(0, 0) = 0.0;
    a(0, 1) = 1.0;
    a(1, 0) = 1.0;
    a(1, 1) = 0.0;
    CHECK(log_det(a).sign == -1);
}

TEST_CASE("symmetry check respects the tolerance") {
    Matrix a = Matrix::identity(3);
    a(0, 1) = 1e-12;
    CHECK(a.is_symmetric(1e-9));
    a(0, 1) = 0.1;
    CHECK_FALSE(a.is_symmetric(1e-9));
}
