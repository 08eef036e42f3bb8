#include "mkg/kahler.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "mkg/errors.hpp"

namespace mkg {

KahlerFamily KahlerFamily::flat() {
    KahlerFamily f;
    f.kind = KahlerKind::Flat;
    f.coefficients = {0.0, 0.0, 1.0};
    return f;
}

KahlerFamily KahlerFamily::polynomial(std::vector<double> coeffs) {
    KahlerFamily f;
    f.kind = KahlerKind::PolynomialRadial;
    f.coefficients = std::move(coeffs);
    return f;
}

KahlerFamily KahlerFamily::make_custom(std::function<RadialDerivatives(double)> fn, MetricScalars limits) {
    KahlerFamily f;
    f.kind = KahlerKind::Custom;
    f.custom = std::move(fn);
    f.custom_limits = limits;
    return f;
}

RadialDerivatives KahlerFamily::radial(double r) const {
    if (kind == KahlerKind::Custom) return custom(r);
    RadialDerivatives d{0.0, 0.0, 0.0, 0.0};
    const auto& c = kind == KahlerKind::Flat ? std::vector<double>{0.0, 0.0, 1.0} : coefficients;
    for (std::size_t n = 0; n < c.size(); ++n) {
        if (c[n] == 0.0) continue;
        double nn = static_cast<double>(n);
        d.phi += c[n] * std::pow(r, nn);
        if (n >= 1) d.d1 += c[n] * nn * std::pow(r, nn - 1);
        if (n >= 2) d.d2 += c[n] * nn * (nn - 1) * std::pow(r, nn - 2);
        if (n >= 3) d.d3 += c[n] * nn * (nn - 1) * (nn - 2) * std::pow(r, nn - 3);
    }
    return d;
}

namespace {

// Series forms valid for every r once c_1 = c_3 = c_5 = 0:
// Φ'/(2r) = Σ c_n n/2 r^{n-2}, Q = Σ c_n n(n-2)/4 r^{n-4}, Q'/(2r) = Σ c_n n(n-2)(n-4)/8 r^{n-6}.
double ipow(double x, int k) {
    double v = 1.0;
    for (int i = 0; i < std::abs(k); ++i) v *= x;
    return k < 0 ? 1.0 / v : v;
}

MetricScalars polynomial_scalars(const std::vector<double>& c, double r) {
    MetricScalars s{0.0, 0.0, 0.0};
    for (std::size_t n = 0; n < c.size(); ++n) {
        if (c[n] == 0.0) continue;
        int k = static_cast<int>(n);
        double nn = static_cast<double>(n);
        double cn = nn / 2.0;
        double qn = nn * (nn - 2) / 4.0;
        double pn = nn * (nn - 2) * (nn - 4) / 8.0;
        if (cn != 0.0) s.c += c[n] * cn * ipow(r, k - 2);
        if (qn != 0.0) s.Q += c[n] * qn * ipow(r, k - 4);
        if (pn != 0.0) s.qp += c[n] * pn * ipow(r, k - 6);
    }
    return s;
}

}  // namespace

MetricScalars scalars_from_derivatives(const RadialDerivatives& d, double r) {
    double r2 = r * r;
    return MetricScalars{
        d.d1 / (2.0 * r),
        (d.d2 - d.d1 / r) / (4.0 * r2),
        (d.d3 - 3.0 * d.d2 / r + 3.0 * d.d1 / r2) / (8.0 * r2 * r),
    };
}

MetricScalars KahlerFamily::scalars(double r) const {
    if (kind == KahlerKind::Custom) {
        if (r < kSmallRadius) return custom_limits;
        return scalars_from_derivatives(custom(r), r);
    }
    static const std::vector<double> flat{0.0, 0.0, 1.0};
    return polynomial_scalars(kind == KahlerKind::Flat ? flat : coefficients, r);
}

void KahlerFamily::validate() const {
    if (kind == KahlerKind::Custom && !custom) throw InvalidFamily("custom Kähler family without a radial function");
    if (kind == KahlerKind::PolynomialRadial) {
        for (std::size_t n : {1u, 3u, 5u}) {
            if (n < coefficients.size() && coefficients[n] != 0.0) {
                throw InvalidFamily(fmt::format("coefficient c_{} must vanish for a metric regular at φ = 0", n));
            }
        }
    }
    if (!(r_max > 0.0)) throw InvalidFamily("r_max must be positive");
    for (double v : b) {
        if (v < 0.0) throw InvalidFamily("bound constants b_n must be nonnegative");
    }
    if (C1 < 0.0 || C2 < 0.0 || C3 < 0.0) throw InvalidFamily("C1, C2, C3 must be nonnegative");
    if (c1 < 0.0 || c2 < 0.0) throw InvalidFamily("c1, c2 must be nonnegative");
    constexpr int kScan = 2000;
    for (int i = 1; i <= kScan; ++i) {
        double r = r_max * i / kScan;
        auto d = radial(r);
        if (!(d.d1 > 0.0) || !(d.d2 > 0.0)) {
            throw DegenerateMetric(fmt::format("Φ' or Φ'' not positive at r = {}", r));
        }
    }
}

HermitianMatrixField::HermitianMatrixField(int dim) : dim_(dim), data_(static_cast<std::size_t>(dim * dim)) {}

void HermitianMatrixField::set(int a, int b, cplx v) {
    if (a == b) v = cplx(v.real(), 0.0);
    data_[a * dim_ + b] = v;
    data_[b * dim_ + a] = std::conj(v);
}

SmallCMat HermitianMatrixField::matrix() const {
    SmallCMat m(dim_, dim_);
    for (int a = 0; a < dim_; ++a)
        for (int b = 0; b < dim_; ++b) m(a, b) = (*this)(a, b);
    return m;
}

namespace {

double norm_of(std::span<const cplx> phi) {
    double s = 0.0;
    for (auto z : phi) s += std::norm(z);
    return std::sqrt(s);
}

void check_radius(const KahlerFamily& f, double r) {
    if (r > f.r_max) throw RadiusExceeded(fmt::format("|φ| = {} exceeds r_max = {}", r, f.r_max));
}

}  // namespace

HermitianMatrixField kahler_metric(const KahlerFamily& family, std::span<const cplx> phi) {
    double r = norm_of(phi);
    check_radius(family, r);
    auto s = family.scalars(r);
    if (!(s.c > 0.0) || !(s.c + s.Q * r * r > 0.0)) throw DegenerateMetric("metric is not positive definite");
    int n = static_cast<int>(phi.size());
    HermitianMatrixField g(n);
    for (int a = 0; a < n; ++a) {
        for (int b = a; b < n; ++b) {
            cplx v = s.Q * std::conj(phi[a]) * phi[b];
            if (a == b) v += s.c;
            g.set(a, b, v);
        }
    }
    return g;
}

HermitianMatrixField kahler_metric_inverse(const KahlerFamily& family, std::span<const cplx> phi) {
    double r = norm_of(phi);
    check_radius(family, r);
    auto s = family.scalars(r);
    double denom = s.c + s.Q * r * r;
    if (!(s.c > 0.0) || !(denom > 0.0)) throw DegenerateMetric("Φ' or Φ'' + Φ'/r not positive");
    double k = s.Q / (s.c * denom);
    int n = static_cast<int>(phi.size());
    HermitianMatrixField gi(n);
    for (int a = 0; a < n; ++a) {
        for (int b = a; b < n; ++b) {
            cplx v = -k * phi[a] * std::conj(phi[b]);
            if (a == b) v += 1.0 / s.c;
            gi.set(a, b, v);
        }
    }
    return gi;
}

MetricDerivative kahler_metric_holomorphic_derivative(const KahlerFamily& family, std::span<const cplx> phi) {
    double r = norm_of(phi);
    check_radius(family, r);
    auto s = family.scalars(r);
    int n = static_cast<int>(phi.size());
    MetricDerivative dg(n);
    for (int c = 0; c < n; ++c) {
        for (int a = 0; a < n; ++a) {
            for (int b = 0; b < n; ++b) {
                cplx v = s.qp * std::conj(phi[a]) * phi[b] * std::conj(phi[c]);
                if (a == b) v += s.Q * std::conj(phi[c]);
                if (c == b) v += s.Q * std::conj(phi[a]);
                dg(c, a, b) = v;
            }
        }
    }
    return dg;
}

double lemma1_rhs(const KahlerFamily& f, double r) {
    double rhs = 0.0;
    for (std::size_t n = 0; n < f.b.size(); ++n) {
        double nn = static_cast<double>(n);
        rhs += 8.0 * f.b[n] * std::pow(r, nn + 6) / ((nn + 4) * (nn + 5) * (nn + 6));
        rhs += 12.0 * f.b[n] * std::pow(r, nn + 4) / ((nn + 2) * (nn + 3) * (nn + 4));
    }
    rhs += 2.0 * f.C1 * r * r * r + f.C2 * r * r / 2.0 + f.C3;
    return rhs;
}

Lemma1Report lemma1_bound_check(const KahlerFamily& f, std::span<const double> radii) {
    Lemma1Report rep;
    for (double r : radii) {
        if (!(r > 0.0) || r > f.r_max) throw RadiusExceeded(fmt::format("radius {} outside (0, r_max]", r));
        Lemma1Sample s{};
        s.r = r;
        s.hypothesis_lhs = std::abs(f.scalars(r).qp);
        for (std::size_t n = 0; n < f.b.size(); ++n) s.hypothesis_rhs += f.b[n] * std::pow(r, static_cast<double>(n));
        if (s.hypothesis_lhs > s.hypothesis_rhs * (1.0 + 1e-12) + 1e-300) {
            throw HypothesisViolated(fmt::format("|Q'/(2r)| = {} exceeds Σ b_n r^n = {} at r = {}", s.hypothesis_lhs,
                                                 s.hypothesis_rhs, r));
        }
        s.lhs = std::abs(f.radial(r).phi);
        s.rhs = lemma1_rhs(f, r);
        s.holds = s.lhs <= s.rhs * (1.0 + 1e-12);
        s.lower_bound = f.c1 / 2.0 * r * r + f.c2;
        s.lower_holds = s.lhs >= s.lower_bound * (1.0 - 1e-12);
        if (!s.holds) ++rep.violations;
        if (!s.lower_holds) ++rep.lower_violations;
        rep.samples.push_back(s);
    }
    return rep;
}

KahlerFamily fit_bound_constants(KahlerFamily f, std::span<const double> radii) {
    double b0 = 0.0;
    for (double r : radii) b0 = std::max(b0, std::abs(f.scalars(r).qp));
    f.b = {b0};
    f.C3 = std::abs(f.radial(0.0).phi);
    double c2 = 0.0;
    for (double r : radii) {
        KahlerFamily probe = f;
        probe.C2 = 0.0;
        double gap = std::abs(f.radial(r).phi) - lemma1_rhs(probe, r);
        if (gap > 0.0) c2 = std::max(c2, 2.0 * gap / (r * r));
    }
    f.C2 = c2 * (1.0 + 1e-12);
    return f;
}

std::vector<double> uniform_radii(double r_hi, int count) {
    std::vector<double> r(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) r[i] = r_hi * (i + 1) / count;
    return r;
}

namespace {

long double potential_ld(const KahlerFamily& f, long double r) {
    if (f.kind == KahlerKind::Custom) return f.custom(static_cast<double>(r)).phi;
    const auto& c = f.kind == KahlerKind::Flat ? std::vector<double>{0.0, 0.0, 1.0} : f.coefficients;
    long double s = 0.0L;
    long double p = 1.0L;
    for (double cn : c) {
        s += cn * p;
        p *= r;
    }
    return s;
}

long double potential_at(const KahlerFamily& f, const std::vector<long double>& x) {
    long double s = 0.0L;
    for (long double v : x) s += v * v;
    return potential_ld(f, std::sqrt(s));
}

}  // namespace

HermitianMatrixField hessian_oracle(const KahlerFamily& f, std::span<const cplx> phi, double step) {
    int n = static_cast<int>(phi.size());
    std::vector<long double> x(2 * n);
    for (int a = 0; a < n; ++a) {
        x[2 * a] = phi[a].real();
        x[2 * a + 1] = phi[a].imag();
    }
    const long double h = step;
    const long double w[5] = {1.0L / 12, -2.0L / 3, 0.0L, 2.0L / 3, -1.0L / 12};
    auto second = [&](int u, int v) {
        if (u == v) {
            const long double c2[5] = {-1.0L / 12, 4.0L / 3, -5.0L / 2, 4.0L / 3, -1.0L / 12};
            long double s = 0.0L;
            for (int i = 0; i < 5; ++i) {
                auto y = x;
                y[u] += (i - 2) * h;
                s += c2[i] * potential_at(f, y);
            }
            return s / (h * h);
        }
        long double s = 0.0L;
        for (int i = 0; i < 5; ++i) {
            if (w[i] == 0.0L) continue;
            for (int j = 0; j < 5; ++j) {
                if (w[j] == 0.0L) continue;
                auto y = x;
                y[u] += (i - 2) * h;
                y[v] += (j - 2) * h;
                s += w[i] * w[j] * potential_at(f, y);
            }
        }
        return s / (h * h);
    };
    HermitianMatrixField g(n);
    for (int a = 0; a < n; ++a) {
        for (int b = a; b < n; ++b) {
            long double xx = second(2 * a, 2 * b);
            long double yy = second(2 * a + 1, 2 * b + 1);
            long double xy = second(2 * a, 2 * b + 1);
            long double yx = second(2 * a + 1, 2 * b);
            g.set(a, b, cplx(static_cast<double>((xx + yy) / 4), static_cast<double>((xy - yx) / 4)));
        }
    }
    return g;
}

std::string describe_q_normalization() {
    return "Q = (Phi'' - Phi'/r) / (4 r^2); the 1/(4 r) prefactor variant does not reproduce the complex Hessian";
}

}  // namespace mkg
