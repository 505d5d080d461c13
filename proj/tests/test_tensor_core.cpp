#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "ttda/dense_tensor.hpp"
#include "ttda/tten_io.hpp"

#include <random>
#include <sstream>

using namespace ttda;

TEST_CASE("linear index round trip matches the first-mode-fastest formula") {
    DenseTensor t({2, 3, 4});
    for (Index lin = 0; lin < t.size(); ++lin) {
        const auto idx = t.multi_index(lin);
        CHECK(t.linear_index(idx) == lin);
        CHECK(lin == idx[0] + 2 * idx[1] + 6 * idx[2]);
    }
}

TEST_CASE("unfold produces the documented matrix shapes") {
    DenseTensor t({2, 3, 4});
    const DenseTensor m = unfold(t, 2);
    CHECK(m.shape() == Shape{6, 4});
    CHECK(unfold(t, 3).shape() == Shape{24, 1});  // vectorization
    CHECK(unfold(t, 1).shape() == Shape{2, 12});
    CHECK_THROWS_AS(unfold(t, 4), std::invalid_argument);
    CHECK_THROWS_AS(unfold(t, -1), std::invalid_argument);
}

TEST_CASE("unfold entry mapping, exhaustively enumerated") {
    std::mt19937_64 rng(11);
    DenseTensor t = oracle::random_tensor({2, 3, 4}, rng);
    const DenseTensor m = unfold(t, 2);
    for (Index i = 0; i < 2; ++i) {
        for (Index j = 0; j < 3; ++j) {
            for (Index k = 0; k < 4; ++k) {
                CHECK(t.at({i, j, k}) == m.at({i + 2 * j, k}));
            }
        }
    }
}

TEST_CASE("fold inverts unfold for every split") {
    std::mt19937_64 rng(12);
    for (int rep = 0; rep < 20; ++rep) {
        const Shape shape = oracle::random_shape(rng, 5, 4);
        const DenseTensor t = oracle::random_tensor(shape, rng);
        for (Index lead = 0; lead <= t.order(); ++lead) {
            const DenseTensor back = fold(unfold(t, lead), shape);
            CHECK(back.shape() == shape);
            CHECK(oracle::max_abs_diff(back, t) == 0.0);
        }
    }
    CHECK_THROWS_AS(fold(DenseTensor({2, 3}), {4, 2}), std::invalid_argument);
}

TEST_CASE("partial_trace against the direct-sum oracle") {
    std::mt19937_64 rng(13);
    DenseTensor t = oracle::random_tensor({2, 3, 2}, rng);
    const DenseTensor d = partial_trace(t, 0, 2);
    CHECK(d.shape() == Shape{3});
    for (Index j = 0; j < 3; ++j) {
        CHECK(d.at({j}) == doctest::Approx(t.at({0, j, 0}) + t.at({1, j, 1})).epsilon(1e-14));
    }

    SUBCASE("identity slices sum to the mode size") {
        DenseTensor eye({2, 3, 2});
        for (Index j = 0; j < 3; ++j) {
            eye.at({0, j, 0}) = 1.0;
            eye.at({1, j, 1}) = 1.0;
        }
        const DenseTensor out = partial_trace(eye, 0, 2);
        for (Index j = 0; j < 3; ++j) CHECK(out.at({j}) == 2.0);
    }

    SUBCASE("2-mode square matrix reduces to the classical trace") {
        DenseTensor m = oracle::random_tensor({3, 3}, rng);
        const DenseTensor tr = partial_trace(m, 0, 1);
        CHECK(tr.order() == 0);
        CHECK(tr.values()[0] == doctest::Approx(m.at({0, 0}) + m.at({1, 1}) + m.at({2, 2})));
    }

    SUBCASE("errors") {
        CHECK_THROWS_AS(partial_trace(t, 0, 1), std::invalid_argument);  // sizes differ
        CHECK_THROWS_AS(partial_trace(t, 1, 1), std::invalid_argument);
        CHECK_THROWS_AS(partial_trace(t, 0, 5), std::invalid_argument);
    }
}

TEST_CASE("partial_trace on random tensors matches the loop oracle") {
    std::mt19937_64 rng(14);
    for (int rep = 0; rep < 30; ++rep) {
        Shape shape = oracle::random_shape(rng, 4, 4, 2);
        std::uniform_int_distribution<Index> pick(0, static_cast<Index>(shape.size()) - 1);
        Index a = pick(rng), b = pick(rng);
        if (a == b) continue;
        shape[static_cast<std::size_t>(b)] = shape[static_cast<std::size_t>(a)];
        const DenseTensor t = oracle::random_tensor(shape, rng);
        CHECK(oracle::max_abs_diff(partial_trace(t, a, b), oracle::naive_partial_trace(t, a, b)) <= 1e-12);
    }
}

TEST_CASE("contract over a single pair reduces to the matrix product") {
    std::mt19937_64 rng(15);
    const DenseTensor a = oracle::random_tensor({3, 4}, rng);
    const DenseTensor b = oracle::random_tensor({4, 5}, rng);
    const DenseTensor c = contract(a, b, {1}, {0});
    const Matrix prod = unfold_view(a, 1) * unfold_view(b, 1);
    CHECK((Eigen::Map<const Matrix>(c.data(), 3, 5) - prod).cwiseAbs().maxCoeff() <= 1e-13);
}

TEST_CASE("contract against the nested-loop oracle over random mode pairs") {
    std::mt19937_64 rng(16);
    const DenseTensor a = oracle::random_tensor({2, 3, 4}, rng);
    const DenseTensor b = oracle::random_tensor({4, 2, 3, 2}, rng);
    const DenseTensor c = contract(a, b, {2, 0}, {0, 1});
    CHECK(c.shape() == Shape{3, 3, 2});
    CHECK(oracle::max_abs_diff(c, oracle::naive_contract(a, b, {2, 0}, {0, 1})) <= 1e-12);

    SUBCASE("errors") {
        CHECK_THROWS_AS(contract(a, b, {0}, {0, 1}), std::invalid_argument);
        CHECK_THROWS_AS(contract(a, b, {0, 0}, {0, 1}), std::invalid_argument);
        CHECK_THROWS_AS(contract(a, b, {0}, {0}), std::invalid_argument);  // size mismatch 2 vs 4
        CHECK_THROWS_AS(contract(a, b, {7}, {0}), std::invalid_argument);
    }
}

TEST_CASE("contract is multilinear and leaves inputs unmodified") {
    std::mt19937_64 rng(17);
    const DenseTensor a = oracle::random_tensor({3, 2, 2}, rng);
    const DenseTensor b = oracle::random_tensor({2, 4}, rng);
    const Vector a_before = a.values();
    const Vector b_before = b.values();

    const DenseTensor ab = contract(a, b, {2}, {0});
    DenseTensor a2 = a;
    a2.values() *= 3.5;
    const DenseTensor ab2 = contract(a2, b, {2}, {0});
    CHECK((ab2.values() - 3.5 * ab.values()).cwiseAbs().maxCoeff() <= 1e-12);

    CHECK(a.values() == a_before);
    CHECK(b.values() == b_before);
}

TEST_CASE("contract_leading equals the generic contraction and the unfolding identity") {
    std::mt19937_64 rng(18);
    const DenseTensor a = oracle::random_tensor({3, 2, 4}, rng);
    const DenseTensor b = oracle::random_tensor({3, 2, 5, 2}, rng);
    const DenseTensor c = contract_leading(a, b);
    CHECK(c.shape() == Shape{4, 5, 2});

    const DenseTensor generic = contract(a, b, {0, 1}, {0, 1});
    CHECK(oracle::max_abs_diff(c, generic) <= 1e-12);

    // R(C') = L(a)^T T_{N-1}(b)
    const Matrix lhs = unfold_view(c, 1);
    const Matrix rhs = unfold_view(a, 2).transpose() * unfold_view(b, 2);
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("contract_leading with a left-orthogonal first operand gives the identity gram") {
    // columns of L(a) orthonormal -> contracting a with itself reshapes to I
    DenseTensor a({2, 2, 2});
    // L(a) = 4x2 with orthonormal columns e_0, e_1
    a.values().setZero();
    a.at({0, 0, 0}) = 1.0;
    a.at({1, 0, 1}) = 1.0;
    const DenseTensor g = contract_leading(a, a);
    CHECK(g.shape() == Shape{2, 2});
    CHECK((Eigen::Map<const Matrix>(g.data(), 2, 2) - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("contract_leading with a single-mode operand is the outer product") {
    std::mt19937_64 rng(19);
    const DenseTensor a = oracle::random_tensor({3}, rng);
    const DenseTensor b = oracle::random_tensor({2, 4}, rng);
    const DenseTensor c = contract_leading(a, b);
    CHECK(c.shape() == Shape{3, 2, 4});
    CHECK(oracle::max_abs_diff(c, oracle::naive_contract(a, b, {}, {})) <= 1e-12);
}

TEST_CASE("transpose permutes modes") {
    std::mt19937_64 rng(20);
    const DenseTensor t = oracle::random_tensor({2, 3, 4}, rng);
    const DenseTensor p = transpose(t, {2, 0, 1});
    CHECK(p.shape() == Shape{4, 2, 3});
    for (Index i = 0; i < 2; ++i) {
        for (Index j = 0; j < 3; ++j) {
            for (Index k = 0; k < 4; ++k) CHECK(p.at({k, i, j}) == t.at({i, j, k}));
        }
    }
    CHECK_THROWS_AS(transpose(t, {0, 0, 1}), std::invalid_argument);
}

TEST_CASE("mode_product contracts one mode in place") {
    std::mt19937_64 rng(21);
    const DenseTensor t = oracle::random_tensor({2, 3, 4}, rng);
    Matrix u(3, 2);
    u << 1, 0, 0, 1, 1, 1;
    const DenseTensor out = mode_product(t, u, 1);
    CHECK(out.shape() == Shape{2, 2, 4});
    for (Index i = 0; i < 2; ++i) {
        for (Index k = 0; k < 4; ++k) {
            CHECK(out.at({i, 0, k}) == doctest::Approx(t.at({i, 0, k}) + t.at({i, 2, k})));
            CHECK(out.at({i, 1, k}) == doctest::Approx(t.at({i, 1, k}) + t.at({i, 2, k})));
        }
    }
}

TEST_CASE("partial_trace is linear in its argument") {
    std::mt19937_64 rng(23);
    const DenseTensor a = oracle::random_tensor({3, 2, 3}, rng);
    const DenseTensor b = oracle::random_tensor({3, 2, 3}, rng);
    DenseTensor combo({3, 2, 3}, 2.5 * a.values() + b.values());
    const DenseTensor lhs = partial_trace(combo, 0, 2);
    const Vector rhs = 2.5 * partial_trace(a, 0, 2).values() + partial_trace(b, 0, 2).values();
    CHECK((lhs.values() - rhs).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("0-mode tensors hold a single scalar") {
    const DenseTensor s = DenseTensor::scalar(4.25);
    CHECK(s.order() == 0);
    CHECK(s.size() == 1);
    CHECK(s.values()[0] == 4.25);
}

TEST_CASE("TTEN round trip and error paths") {
    std::mt19937_64 rng(22);
    const DenseTensor t = oracle::random_tensor({3, 1, 5}, rng);
    std::stringstream buf;
    write_tten(t, buf);
    const DenseTensor back = read_tten(buf);
    CHECK(back.shape() == t.shape());
    CHECK(back.values() == t.values());

    SUBCASE("scalar tensor") {
        std::stringstream sbuf;
        write_tten(DenseTensor::scalar(-1.5), sbuf);
        const DenseTensor s = read_tten(sbuf);
        CHECK(s.order() == 0);
        CHECK(s.values()[0] == -1.5);
    }

    SUBCASE("bad magic") {
        std::stringstream bad("XXXX rest");
        CHECK_THROWS_AS(read_tten(bad), std::runtime_error);
    }

    SUBCASE("truncated stream") {
        std::string full = buf.str();
        std::stringstream cut(full.substr(0, full.size() / 2));
        CHECK_THROWS_AS(read_tten(cut), std::runtime_error);
    }
}
