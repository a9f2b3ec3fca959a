#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <filesystem>

#include "dcom/io.hpp"
#include "dcom/linalg.hpp"
#include "dcom/rng.hpp"
#include "dcom/synth.hpp"
#include "testutil.hpp"

using namespace dcom;

namespace {

// naive elementwise-sum oracle, deliberately written with a different loop
// nest than the production kernel
DenseMatrix matmul_oracle(const DenseMatrix& a, const DenseMatrix& b) {
    DenseMatrix out(a.rows(), b.cols());
    std::vector<double> acc(a.rows() * b.cols(), 0.0);
    for (std::size_t t = 0; t < a.cols(); ++t) {
        for (std::size_t i = 0; i < a.rows(); ++i) {
            for (std::size_t j = 0; j < b.cols(); ++j) {
                acc[i * b.cols() + j] +=
                    static_cast<double>(a(i, t)) * static_cast<double>(b(t, j));
            }
        }
    }
    for (std::size_t i = 0; i < out.size(); ++i) {
        out.data()[i] = static_cast<float>(acc[i]);
    }
    return out;
}

DenseMatrix diag3(float a, float b, float c) {
    DenseMatrix m(3, 3);
    m(0, 0) = a;
    m(1, 1) = b;
    m(2, 2) = c;
    return m;
}

} // namespace

TEST_CASE("matmul identity and permutation") {
    DenseMatrix b = random_uniform_matrix(3, 4, 11);
    DenseMatrix i3 = DenseMatrix::identity(3);
    CHECK(testutil::max_abs_diff(matmul(i3, b), b) == 0.0);

    DenseMatrix a(2, 2, {1, 2, 3, 4});
    DenseMatrix p(2, 2, {0, 1, 1, 0});
    DenseMatrix got = matmul(a, p);
    CHECK(got(0, 0) == 2.0f);
    CHECK(got(0, 1) == 1.0f);
    CHECK(got(1, 0) == 4.0f);
    CHECK(got(1, 1) == 3.0f);
}

TEST_CASE("matmul matches the summation oracle") {
    DenseMatrix a = random_uniform_matrix(7, 5, 21);
    DenseMatrix b = random_uniform_matrix(5, 3, 22);
    CHECK(testutil::max_abs_diff(matmul(a, b), matmul_oracle(a, b)) <= 1e-5);
}

TEST_CASE("matmul shape error") {
    DenseMatrix a(2, 3);
    DenseMatrix b(2, 2);
    CHECK_THROWS_AS(matmul(a, b), shape_error);
}

TEST_CASE("matmul associativity on random triples") {
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
        DenseMatrix a = random_uniform_matrix(9, 6, 100 + seed);
        DenseMatrix b = random_uniform_matrix(6, 7, 200 + seed);
        DenseMatrix c = random_uniform_matrix(7, 5, 300 + seed);
        CHECK(testutil::rel_fro_diff(matmul(matmul(a, b), c), matmul(a, matmul(b, c))) <=
              1e-4);
    }
}

TEST_CASE("frobenius norm basics") {
    CHECK(frobenius_norm(DenseMatrix(4, 5)) == 0.0);
    CHECK(frobenius_norm(DenseMatrix::identity(4)) == doctest::Approx(2.0).epsilon(1e-12));
    DenseMatrix m(1, 2, {3, 4});
    CHECK(frobenius_norm(m) == doctest::Approx(5.0).epsilon(1e-12));
}

TEST_CASE("matrix validation") {
    CHECK_THROWS_AS(DenseMatrix(2, 2, {1, 2, 3}), shape_error);
    CHECK_THROWS_AS(DenseMatrix(1, 2, {1.0f, std::numeric_limits<float>::infinity()}),
                    validation_error);
}

TEST_CASE("orthogonalize: parallel input signals breakdown") {
    Vector v = random_uniform_vector(32, 5);
    double n = norm2(v);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<float>(v[i] / n);
    std::vector<Vector> basis{v};
    OrthoResult r = orthogonalize_against(v, basis, 2, 1e-6);
    CHECK(r.breakdown);
    CHECK(r.beta <= 1e-6);
}

TEST_CASE("orthogonalize: already orthogonal input passes through") {
    // basis = e0, z along e1 scaled
    Vector e0(8), z(8);
    e0[0] = 1.0f;
    z[1] = 3.0f;
    std::vector<Vector> basis{e0};
    OrthoResult r = orthogonalize_against(z, basis);
    CHECK(!r.breakdown);
    CHECK(r.beta == doctest::Approx(3.0).epsilon(1e-6));
    CHECK(r.v[1] == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("orthogonalize matches the explicit projector oracle") {
    const std::size_t n = 40, q = 5;
    DenseMatrix qmat = random_orthonormal_columns(n, q, 77);
    std::vector<Vector> basis;
    for (std::size_t j = 0; j < q; ++j) {
        Vector b(n);
        for (std::size_t i = 0; i < n; ++i) b[i] = qmat(i, j);
        basis.push_back(b);
    }
    Vector z = random_uniform_vector(n, 78);
    OrthoResult r = orthogonalize_against(z, basis);

    // (I - Q Q^T) z, normalized, in double
    std::vector<double> p(n);
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i];
    for (std::size_t j = 0; j < q; ++j) {
        double d = 0.0;
        for (std::size_t i = 0; i < n; ++i) d += p[i] * static_cast<double>(qmat(i, j));
        for (std::size_t i = 0; i < n; ++i) p[i] -= d * static_cast<double>(qmat(i, j));
    }
    double pn = 0.0;
    for (double x : p) pn += x * x;
    pn = std::sqrt(pn);
    CHECK(r.beta == doctest::Approx(pn).epsilon(1e-5));
    for (std::size_t i = 0; i < n; ++i) {
        CHECK(std::abs(r.v[i] - p[i] / pn) <= 1e-5);
    }
    // orthogonality against every basis vector
    for (const auto& b : basis) CHECK(std::abs(dot(r.v, b)) <= 1e-4);
}

TEST_CASE("orthogonalize is idempotent") {
    const std::size_t n = 24;
    DenseMatrix qmat = random_orthonormal_columns(n, 4, 91);
    std::vector<Vector> basis;
    for (std::size_t j = 0; j < 4; ++j) {
        Vector b(n);
        for (std::size_t i = 0; i < n; ++i) b[i] = qmat(i, j);
        basis.push_back(b);
    }
    Vector z = random_uniform_vector(n, 92);
    OrthoResult once = orthogonalize_against(z, basis);
    OrthoResult twice = orthogonalize_against(once.v, basis);
    for (std::size_t i = 0; i < n; ++i) {
        CHECK(std::abs(once.v[i] - twice.v[i]) <= 1e-5);
    }
}

TEST_CASE("orthogonalize rejects zero passes") {
    Vector z = random_uniform_vector(4, 1);
    CHECK_THROWS_AS(orthogonalize_against(z, {}, 0), parameter_error);
}

TEST_CASE("svd oracle: exact diagonal spectrum") {
    SvdResult r = svd_oracle(diag3(3, 2, 1));
    REQUIRE(r.s.size() == 3);
    CHECK(r.s[0] == doctest::Approx(3.0).epsilon(1e-6));
    CHECK(r.s[1] == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(r.s[2] == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("svd oracle: rank-1 outer product") {
    Rng rng(8);
    const std::size_t m = 9, n = 6;
    std::vector<double> x(m), y(n);
    for (auto& v : x) v = rng.uniform_pm1();
    for (auto& v : y) v = rng.uniform_pm1();
    DenseMatrix a(m, n);
    double nx = 0, ny = 0;
    for (double v : x) nx += v * v;
    for (double v : y) ny += v * v;
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j)
            a(i, j) = static_cast<float>(x[i] * y[j]);
    SvdResult r = svd_oracle(a);
    CHECK(r.s[0] == doctest::Approx(std::sqrt(nx) * std::sqrt(ny)).epsilon(1e-5));
    for (std::size_t i = 1; i < r.s.size(); ++i) CHECK(r.s[i] <= 1e-5 * r.s[0]);
    // orthonormal even in the null space
    CHECK(testutil::max_col_orthogonality_residual(r.u) <= 1e-4);
    CHECK(testutil::max_row_orthogonality_residual(r.v) <= 1e-4);
}

TEST_CASE("svd oracle: random reconstruction, both orientations") {
    for (auto [rows, cols] : {std::pair<std::size_t, std::size_t>{20, 12}, {12, 20}}) {
        DenseMatrix a = random_uniform_matrix(rows, cols, 40 + rows);
        SvdResult r = svd_oracle(a);
        DenseMatrix sig(r.s.size(), r.s.size());
        for (std::size_t i = 0; i < r.s.size(); ++i)
            sig(i, i) = static_cast<float>(r.s[i]);
        DenseMatrix rec = matmul(matmul(r.u, sig), r.v);
        CHECK(testutil::rel_fro_diff(a, rec) <= 1e-4);
        CHECK(testutil::max_col_orthogonality_residual(r.u) <= 1e-4);
        CHECK(testutil::max_row_orthogonality_residual(r.v) <= 1e-4);
        CHECK(std::is_sorted(r.s.rbegin(), r.s.rend()));
    }
}

TEST_CASE("svd oracle singular values match the eigenvalue oracle") {
    DenseMatrix a = random_uniform_matrix(14, 9, 55);
    SvdResult r = svd_oracle(a);
    // gram matrix in double
    std::vector<std::vector<double>> g(9, std::vector<double>(9, 0.0));
    for (std::size_t p = 0; p < 9; ++p)
        for (std::size_t q = 0; q < 9; ++q)
            for (std::size_t i = 0; i < 14; ++i)
                g[p][q] += static_cast<double>(a(i, p)) * static_cast<double>(a(i, q));
    std::vector<double> eig = testutil::symmetric_eigenvalues(g);
    for (std::size_t i = 0; i < 9; ++i) {
        double want = std::sqrt(std::max(0.0, eig[i]));
        if (want > 1e-6) {
            CHECK(r.s[i] == doctest::Approx(want).epsilon(1e-3));
        }
    }
}

TEST_CASE("svd oracle sign convention is deterministic") {
    DenseMatrix a = random_uniform_matrix(10, 7, 66);
    SvdResult r1 = svd_oracle(a);
    SvdResult r2 = svd_oracle(a);
    CHECK(r1.u.data() == r2.u.data());
    CHECK(r1.v.data() == r2.v.data());
    CHECK(r1.s == r2.s);
    for (std::size_t k = 0; k < r1.u.cols(); ++k) {
        float best = 0.0f;
        std::size_t arg = 0;
        for (std::size_t i = 0; i < r1.u.rows(); ++i) {
            if (std::abs(r1.u(i, k)) > best) {
                best = std::abs(r1.u(i, k));
                arg = i;
            }
        }
        CHECK(r1.u(arg, k) >= 0.0f);
    }
}

TEST_CASE("svd oracle size guard") {
    CHECK_THROWS_AS(svd_oracle(DenseMatrix(1100, 1100)), parameter_error);
}

TEST_CASE("dcm1 round trip preserves bits") {
    auto path = std::filesystem::temp_directory_path() / "dcom_test_roundtrip.dcm1";
    for (std::uint64_t seed : {1ull, 2ull}) {
        DenseMatrix m = random_uniform_matrix(13, 7, seed);
        m(3, 4) = -0.0f;
        write_matrix_dcm1(path, m);
        DenseMatrix back = read_matrix_dcm1(path);
        REQUIRE(back.rows() == m.rows());
        REQUIRE(back.cols() == m.cols());
        CHECK(std::memcmp(back.data().data(), m.data().data(),
                          m.size() * sizeof(float)) == 0);
    }
    std::filesystem::remove(path);
}

TEST_CASE("csv reader handles fixtures and rejects garbage") {
    auto path = std::filesystem::temp_directory_path() / "dcom_test_fixture.csv";
    {
        std::ofstream os(path);
        os << "1,2,3\n4,5,6\n";
    }
    DenseMatrix m = read_matrix_csv(path);
    REQUIRE(m.rows() == 2);
    REQUIRE(m.cols() == 3);
    CHECK(m(1, 2) == 6.0f);
    {
        std::ofstream os(path);
        os << "1,2\n3\n";
    }
    CHECK_THROWS_AS(read_matrix_csv(path), io_error);
    std::filesystem::remove(path);
}

TEST_CASE("svd oracle degenerate shapes") {
    DenseMatrix one(1, 1, {-2.5f});
    SvdResult r1 = svd_oracle(one);
    REQUIRE(r1.s.size() == 1);
    CHECK(r1.s[0] == doctest::Approx(2.5).epsilon(1e-6));
    DenseMatrix rec1 = matmul(matmul(r1.u, DenseMatrix(1, 1, {2.5f})), r1.v);
    CHECK(rec1(0, 0) == doctest::Approx(-2.5).epsilon(1e-6));

    DenseMatrix row(1, 6);
    for (std::size_t j = 0; j < 6; ++j) row(0, j) = static_cast<float>(j + 1);
    SvdResult rr = svd_oracle(row);
    CHECK(rr.s[0] == doctest::Approx(std::sqrt(91.0)).epsilon(1e-6));

    DenseMatrix col(6, 1);
    for (std::size_t i = 0; i < 6; ++i) col(i, 0) = static_cast<float>(i + 1);
    SvdResult rc = svd_oracle(col);
    CHECK(rc.s[0] == doctest::Approx(std::sqrt(91.0)).epsilon(1e-6));

    // all-zero input still yields orthonormal factors
    SvdResult rz = svd_oracle(DenseMatrix(5, 3));
    for (double s : rz.s) CHECK(s == 0.0);
    CHECK(testutil::max_col_orthogonality_residual(rz.u) <= 1e-6);
    CHECK(testutil::max_row_orthogonality_residual(rz.v) <= 1e-6);
}

TEST_CASE("matmul with an empty inner dimension yields zeros") {
    DenseMatrix a(4, 0);
    DenseMatrix b(0, 3);
    DenseMatrix c = matmul(a, b);
    REQUIRE(c.rows() == 4);
    REQUIRE(c.cols() == 3);
    for (float v : c.data()) CHECK(v == 0.0f);
}

TEST_CASE("csv reader accepts scientific notation") {
    auto path = std::filesystem::temp_directory_path() / "dcom_test_sci.csv";
    {
        std::ofstream os(path);
        os << "1e-3,-2.5E2\n";
    }
    DenseMatrix m = read_matrix_csv(path);
    CHECK(m(0, 0) == doctest::Approx(1e-3f));
    CHECK(m(0, 1) == doctest::Approx(-250.0f));
    std::filesystem::remove(path);
}

TEST_CASE("dcm1 reader rejects foreign files") {
    auto path = std::filesystem::temp_directory_path() / "dcom_test_bad.dcm1";
    {
        std::ofstream os(path, std::ios::binary);
        os << "NOPE00000000";
    }
    CHECK_THROWS_AS(read_matrix_dcm1(path), io_error);
    std::filesystem::remove(path);
}
