#include <doctest.h>

#include <cmath>
#include <random>

#include "mkg/errors.hpp"
#include "mkg/kahler.hpp"

using namespace mkg;

namespace {

double max_entry_diff(const HermitianMatrixField& a, const HermitianMatrixField& b) {
    double d = 0.0;
    for (int i = 0; i < a.dim(); ++i)
        for (int j = 0; j < a.dim(); ++j) d = std::max(d, std::abs(a(i, j) - b(i, j)));
    return d;
}

double max_entry(const HermitianMatrixField& a) {
    double d = 0.0;
    for (int i = 0; i < a.dim(); ++i)
        for (int j = 0; j < a.dim(); ++j) d = std::max(d, std::abs(a(i, j)));
    return d;
}

std::vector<cplx> random_point(std::mt19937_64& rng, int n, double radius) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<cplx> phi(n);
    double norm = 0.0;
    for (cplx& f : phi) {
        f = {u(rng), u(rng)};
        norm += std::norm(f);
    }
    double s = radius / std::sqrt(norm);
    for (cplx& f : phi) f *= s;
    return phi;
}

}  // namespace

TEST_CASE("flat metric is the identity") {
    KahlerFamily f = KahlerFamily::flat();
    std::vector<cplx> one{1.0};
    CHECK(kahler_metric(f, one)(0, 0) == cplx(1.0));
    std::vector<cplx> two{{0.3, 0.4}, 0.0};
    HermitianMatrixField g = kahler_metric(f, two);
    CHECK(g(0, 0) == cplx(1.0));
    CHECK(g(1, 1) == cplx(1.0));
    CHECK(g(0, 1) == cplx(0.0));
    CHECK(kahler_metric_inverse(f, one)(0, 0) == cplx(1.0));
    MetricDerivative d = kahler_metric_holomorphic_derivative(f, two);
    for (int c = 0; c < 2; ++c)
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b) CHECK(d(c, a, b) == cplx(0.0));
}

TEST_CASE("quartic potential metric at unit field") {
    KahlerFamily f = KahlerFamily::polynomial({0.0, 0.0, 1.0, 0.0, 0.25});
    std::vector<cplx> one{1.0};
    CHECK(std::abs(kahler_metric(f, one)(0, 0) - 2.0) < 1e-14);
    CHECK(std::abs(kahler_metric_inverse(f, one)(0, 0) - 0.5) < 1e-14);
    // g = 1 + |φ|² so the Wirtinger derivative ∂_φ g = φ̄ = 1.
    MetricDerivative d = kahler_metric_holomorphic_derivative(f, one);
    CHECK(std::abs(d(0, 0, 0) - 1.0) < 1e-12);
}

TEST_CASE("metric equals the finite-difference Hessian of the potential") {
    std::mt19937_64 rng(7);
    std::vector<KahlerFamily> families{KahlerFamily::flat(), KahlerFamily::polynomial({0.0, 0.0, 1.0, 0.0, 0.25}),
                                       KahlerFamily::polynomial({0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.1})};
    double worst = 0.0;
    for (const KahlerFamily& f : families)
        for (int k = 0; k < 100; ++k) {
            int n = 1 + k % 3;
            std::uniform_real_distribution<double> rad(0.05, 2.0);
            std::vector<cplx> phi = random_point(rng, n, rad(rng));
            HermitianMatrixField g = kahler_metric(f, phi), h = hessian_oracle(f, phi);
            worst = std::max(worst, max_entry_diff(g, h) / max_entry(h));
        }
    CHECK(worst < 1e-6);
}

TEST_CASE("metric is Hermitian, positive and inverted exactly") {
    KahlerFamily f = KahlerFamily::polynomial({0.0, 0.0, 1.0, 0.0, 0.25});
    std::mt19937_64 rng(3);
    for (int k = 0; k < 50; ++k) {
        std::vector<cplx> phi = random_point(rng, 3, 0.1 + 0.03 * k);
        HermitianMatrixField g = kahler_metric(f, phi), gi = kahler_metric_inverse(f, phi);
        SmallCMat G = g.matrix(), Gi = gi.matrix();
        CHECK((G - G.adjoint()).cwiseAbs().maxCoeff() == 0.0);
        Eigen::SelfAdjointEigenSolver<SmallCMat> es(G);
        CHECK(es.eigenvalues().minCoeff() > 0.0);
        CHECK((Gi * G.transpose() - SmallCMat::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("holomorphic derivative matches differences of the metric") {
    KahlerFamily f = KahlerFamily::polynomial({0.0, 0.0, 1.0, 0.0, 0.25, 0.0, 0.05});
    std::mt19937_64 rng(11);
    double h = 1e-5;
    for (int k = 0; k < 20; ++k) {
        std::vector<cplx> phi = random_point(rng, 2, 0.3 + 0.05 * k);
        MetricDerivative d = kahler_metric_holomorphic_derivative(f, phi);
        double worst = 0.0, scale = 0.0;
        for (int c = 0; c < 2; ++c) {
            auto shifted = [&](cplx delta) {
                std::vector<cplx> p = phi;
                p[c] += delta;
                return kahler_metric(f, p);
            };
            HermitianMatrixField xp = shifted(h), xm = shifted(-h), yp = shifted(cplx(0, h)), ym = shifted(cplx(0, -h));
            for (int a = 0; a < 2; ++a)
                for (int b = 0; b < 2; ++b) {
                    cplx dx = (xp(a, b) - xm(a, b)) / (2.0 * h), dy = (yp(a, b) - ym(a, b)) / (2.0 * h);
                    cplx wirtinger = 0.5 * (dx - cplx(0, 1) * dy);
                    worst = std::max(worst, std::abs(wirtinger - d(c, a, b)));
                    scale = std::max(scale, std::abs(d(c, a, b)));
                }
        }
        CHECK(worst < 1e-6 * std::max(scale, 1.0));
    }
}

TEST_CASE("phase rotations leave metric invariants unchanged") {
    KahlerFamily f = KahlerFamily::polynomial({0.0, 0.0, 1.0, 0.0, 0.25});
    std::vector<cplx> phi{{0.3, 0.2}, {-0.1, 0.5}};
    std::vector<cplx> rot{phi[0] * std::polar(1.0, 0.7), phi[1] * std::polar(1.0, -1.9)};
    HermitianMatrixField g = kahler_metric(f, phi), gr = kahler_metric(f, rot);
    auto form = [](const HermitianMatrixField& m, const std::vector<cplx>& p) {
        cplx s = 0.0;
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b) s += p[a] * m(a, b) * std::conj(p[b]);
        return s;
    };
    CHECK(std::abs(form(g, phi) - form(gr, rot)) < 1e-12);
    Eigen::SelfAdjointEigenSolver<SmallCMat> e1(g.matrix()), e2(gr.matrix());
    CHECK((e1.eigenvalues() - e2.eigenvalues()).cwiseAbs().maxCoeff() < 1e-12);
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) CHECK(std::abs(g(a, b)) == doctest::Approx(std::abs(gr(a, b))).epsilon(1e-12));
}

TEST_CASE("small radius uses the analytic limit") {
    KahlerFamily f = KahlerFamily::polynomial({0.0, 0.0, 1.0, 0.0, 0.25});
    MetricScalars m0 = f.scalars(0.0), m1 = f.scalars(1e-9);
    CHECK(m0.c == doctest::Approx(1.0));
    CHECK(m0.Q == doctest::Approx(0.5));
    CHECK(std::isfinite(m1.qp));
    CHECK(m1.c == doctest::Approx(m0.c).epsilon(1e-12));
}

TEST_CASE("radius and degeneracy errors") {
    KahlerFamily f = KahlerFamily::polynomial({0.0, 0.0, 1.0, 0.0, 0.25});
    f.r_max = 1.0;
    std::vector<cplx> far{2.0};
    CHECK_THROWS_AS(kahler_metric(f, far), RadiusExceeded);
    KahlerFamily bad = KahlerFamily::polynomial({0.0, 0.0, 1.0, 0.0, -1.0});
    bad.r_max = 5.0;
    std::vector<cplx> p{1.0};
    CHECK_THROWS_AS(kahler_metric_inverse(bad, p), DegenerateMetric);
}

TEST_CASE("flat family saturates the bound and the lower bound with equality") {
    KahlerFamily f = KahlerFamily::flat();
    f.C2 = 2.0;
    std::vector<double> r{1.0};
    Lemma1Report rep = lemma1_bound_check(f, r);
    REQUIRE(rep.samples.size() == 1);
    CHECK(rep.samples[0].lhs == doctest::Approx(1.0));
    CHECK(rep.samples[0].rhs == doctest::Approx(1.0));
    CHECK(rep.samples[0].holds);

    f.c1 = 2.0;
    f.c2 = 0.0;
    f.lower_bound_configured = true;
    std::vector<double> radii{0.5, 1.0, 2.0};
    rep = lemma1_bound_check(f, radii);
    CHECK(rep.lower_violations == 0);
    for (const Lemma1Sample& s : rep.samples) CHECK(s.lower_bound == doctest::Approx(s.lhs));
}

TEST_CASE("fitted constants satisfy the bound on a sextic family") {
    KahlerFamily f = KahlerFamily::polynomial({0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.1});
    std::vector<double> radii = uniform_radii(2.0, 1000);
    KahlerFamily fitted = fit_bound_constants(f, radii);
    REQUIRE(!fitted.b.empty());
    CHECK(fitted.b[0] > 0.0);
    Lemma1Report rep = lemma1_bound_check(fitted, radii);
    CHECK(rep.violations == 0);
    CHECK(rep.samples.size() == 1000);
}

TEST_CASE("hypothesis violation is reported") {
    KahlerFamily f = KahlerFamily::polynomial({0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.1});
    f.b = {1e-6};
    std::vector<double> radii{1.0, 2.0};
    CHECK_THROWS_AS(lemma1_bound_check(f, radii), HypothesisViolated);
}

TEST_CASE("resolved Q normalization is reported") {
    CHECK(describe_q_normalization().find("4 r^2") != std::string::npos);
}
