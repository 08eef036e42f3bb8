#include <doctest.h>

#include <cmath>
#include <random>

#include "mkg/couplings.hpp"
#include "mkg/errors.hpp"

using namespace mkg;

namespace {

double norm2(const SmallMat& m) { return m.operatorNorm(); }

CouplingFamily saturating_pair() {
    CouplingFamily f = CouplingFamily::identity(2);
    f.h_kind = CouplingKind::Saturating;
    f.h_mod = SmallMat::Ones(2, 2);
    f.h_amplitude = 0.25;
    f.k_kind = CouplingKind::Saturating;
    f.k_mod = SmallMat::Identity(2, 2);
    f.k_amplitude = 0.1;
    return f;
}

}  // namespace

TEST_CASE("constant identity coupling") {
    CouplingFamily f = CouplingFamily::identity(3);
    SmallMat I = SmallMat::Identity(3, 3);
    CHECK(eval_h(f, 7.3) == I);
    CHECK(eval_h_inverse(f, 7.3) == I);
    CHECK(eval_h_prime(f, 7.3).isZero(0.0));
    CHECK(eval_h_second(f, 7.3).isZero(0.0));
    CHECK(eval_k(f, 2.0).isZero(0.0));
    CHECK(eval_k_prime(f, 2.0).isZero(0.0));
}

TEST_CASE("saturating family at zero") {
    CouplingFamily f = saturating_pair();
    CHECK((eval_h(f, 0.0) - SmallMat::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-15);
    CHECK((eval_h_prime(f, 0.0) - 0.25 * SmallMat::Ones(2, 2)).cwiseAbs().maxCoeff() < 1e-15);
    CHECK(eval_k(f, 0.0).cwiseAbs().maxCoeff() < 1e-15);
    CHECK((eval_k_prime(f, 0.0) - 0.1 * SmallMat::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("derivatives match central differences") {
    CouplingFamily f = saturating_pair();
    f.h_base << 1.5, 0.2, 0.2, 1.1;
    f.h_mod << 0.4, -0.3, -0.3, 0.2;
    f.h_amplitude = 1.0;
    f.k_mod << 0.3, 0.5, 0.5, -0.2;
    f.validate();
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.01, 4.0);
    double e = 1e-5;
    for (int i = 0; i < 100; ++i) {
        double p = u(rng);
        SmallMat dh = (eval_h(f, p + e) - eval_h(f, p - e)) / (2 * e);
        SmallMat d2h = (eval_h_prime(f, p + e) - eval_h_prime(f, p - e)) / (2 * e);
        SmallMat dk = (eval_k(f, p + e) - eval_k(f, p - e)) / (2 * e);
        SmallMat d2k = (eval_k_prime(f, p + e) - eval_k_prime(f, p - e)) / (2 * e);
        CHECK((dh - eval_h_prime(f, p)).cwiseAbs().maxCoeff() < 1e-8);
        CHECK((d2h - eval_h_second(f, p)).cwiseAbs().maxCoeff() < 1e-8);
        CHECK((dk - eval_k_prime(f, p)).cwiseAbs().maxCoeff() < 1e-8);
        CHECK((d2k - eval_k_second(f, p)).cwiseAbs().maxCoeff() < 1e-8);
        CHECK((eval_h_inverse(f, p) * eval_h(f, p) - SmallMat::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("array evaluator agrees with matrix evaluators") {
    CouplingFamily f = saturating_pair();
    double h[4], hp[4], k[4], kp[4];
    for (double p : {0.0, 0.3, 2.5}) {
        eval_coupling_arrays(f, p, h, hp, k, kp);
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) {
                CHECK(h[i * 2 + j] == doctest::Approx(eval_h(f, p)(i, j)).epsilon(1e-15));
                CHECK(hp[i * 2 + j] == doctest::Approx(eval_h_prime(f, p)(i, j)).epsilon(1e-15));
                CHECK(k[i * 2 + j] == doctest::Approx(eval_k(f, p)(i, j)).epsilon(1e-15));
                CHECK(kp[i * 2 + j] == doctest::Approx(eval_k_prime(f, p)(i, j)).epsilon(1e-15));
            }
    }
}

TEST_CASE("boundedness scan reaches the analytic suprema") {
    CouplingFamily f = saturating_pair();
    double sup_h = 0.0, sup_hp = 0.0, sup_k = 0.0;
    for (double p = 0.0; p <= 1e6; p = p < 1.0 ? p + 0.01 : p * 1.1) {
        SmallMat h = eval_h(f, p), hp = eval_h_prime(f, p), k = eval_k(f, p);
        REQUIRE(h.allFinite());
        REQUIRE(hp.allFinite());
        sup_h = std::max(sup_h, norm2(h));
        sup_hp = std::max(sup_hp, norm2(hp));
        sup_k = std::max(sup_k, norm2(k));
    }
    CHECK(sup_h == doctest::Approx(1.5).epsilon(1e-12));
    CHECK(sup_hp == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(sup_k == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("indefinite h is rejected on validation") {
    CouplingFamily f = CouplingFamily::identity(2);
    f.h_kind = CouplingKind::Saturating;
    f.h_mod = SmallMat::Ones(2, 2);
    f.h_amplitude = 0.6;
    CHECK_THROWS_AS(f.validate(), IndefiniteCoupling);
    f.h_amplitude = 0.4;
    CHECK_NOTHROW(f.validate());
    CouplingFamily g = CouplingFamily::identity(2);
    g.k_base << 0.0, 1.0, 1.0, 0.0;
    CHECK_NOTHROW(g.validate());
}

TEST_CASE("symmetry is preserved") {
    CouplingFamily f = saturating_pair();
    f.h_base << 2.0, 0.3, 0.3, 1.0;
    for (double p : {0.0, 0.1, 1.0, 10.0}) {
        SmallMat h = eval_h(f, p);
        CHECK((h - h.transpose()).cwiseAbs().maxCoeff() == 0.0);
        Eigen::SelfAdjointEigenSolver<SmallMat> es(h);
        CHECK(es.eigenvalues().minCoeff() > 0.0);
    }
}
