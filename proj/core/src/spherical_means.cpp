#include "mkg/spherical_means.hpp"

#include <cmath>
#include <memory>
#include <numbers>

#include <gsl/gsl_integration.h>

#include "mkg/errors.hpp"

namespace mkg {

SphereQuadrature SphereQuadrature::product(int order) {
    if (order < 0) throw InvalidFamily("quadrature order must be nonnegative");
    int m = order / 2 + 1;
    int naz = order + 1;
    std::unique_ptr<gsl_integration_glfixed_table, decltype(&gsl_integration_glfixed_table_free)> table(
        gsl_integration_glfixed_table_alloc(std::size_t(m)), &gsl_integration_glfixed_table_free);
    if (!table) throw InvalidFamily("Gauss-Legendre table allocation failed");
    SphereQuadrature q;
    q.order = order;
    double dphi = 2.0 * std::numbers::pi / naz;
    for (int i = 0; i < m; ++i) {
        double mu, w;
        gsl_integration_glfixed_point(-1.0, 1.0, std::size_t(i), &mu, &w, table.get());
        double st = std::sqrt(std::max(0.0, 1.0 - mu * mu));
        for (int j = 0; j < naz; ++j) {
            double ph = j * dphi;
            q.nodes.push_back({st * std::cos(ph), st * std::sin(ph), mu});
            q.weights.push_back(w * dphi);
        }
    }
    return q;
}

WaveField WaveField::sampled(std::function<double(double, const Vec3&)> u, double h) {
    WaveField f;
    f.u = u;
    auto d4 = [h](auto g) { return (8.0 * (g(h) - g(-h)) - (g(2.0 * h) - g(-2.0 * h))) / (12.0 * h); };
    f.ut = [u, d4](double t, const Vec3& x) { return d4([&](double s) { return u(t + s, x); }); };
    f.grad = [u, d4](double t, const Vec3& x) {
        Vec3 g;
        for (int i = 0; i < 3; ++i)
            g[i] = d4([&](double s) {
                Vec3 y = x;
                y[i] += s;
                return u(t, y);
            });
        return g;
    };
    return f;
}

WaveField WaveField::plane_wave(const Vec3& k, double amplitude, double phase) {
    double w = std::sqrt(k[0] * k[0] + k[1] * k[1] + k[2] * k[2]);
    auto arg = [k, w, phase](double t, const Vec3& x) { return k[0] * x[0] + k[1] * x[1] + k[2] * x[2] - w * t + phase; };
    WaveField f;
    f.u = [=](double t, const Vec3& x) { return amplitude * std::cos(arg(t, x)); };
    f.ut = [=](double t, const Vec3& x) { return amplitude * w * std::sin(arg(t, x)); };
    f.grad = [=](double t, const Vec3& x) {
        double s = -amplitude * std::sin(arg(t, x));
        return Vec3{s * k[0], s * k[1], s * k[2]};
    };
    return f;
}

WaveField WaveField::constant(double c) {
    WaveField f;
    f.u = [c](double, const Vec3&) { return c; };
    f.ut = [](double, const Vec3&) { return 0.0; };
    f.grad = [](double, const Vec3&) { return Vec3{0.0, 0.0, 0.0}; };
    return f;
}

WaveField WaveField::time_linear() {
    WaveField f;
    f.u = [](double t, const Vec3&) { return t; };
    f.ut = [](double, const Vec3&) { return 1.0; };
    f.grad = [](double, const Vec3&) { return Vec3{0.0, 0.0, 0.0}; };
    return f;
}

WaveField operator+(const WaveField& a, const WaveField& b) {
    WaveField f;
    f.u = [a, b](double t, const Vec3& x) { return a.u(t, x) + b.u(t, x); };
    f.ut = [a, b](double t, const Vec3& x) { return a.ut(t, x) + b.ut(t, x); };
    f.grad = [a, b](double t, const Vec3& x) {
        Vec3 ga = a.grad(t, x), gb = b.grad(t, x);
        return Vec3{ga[0] + gb[0], ga[1] + gb[1], ga[2] + gb[2]};
    };
    return f;
}

WaveField operator*(double s, const WaveField& a) {
    WaveField f;
    f.u = [s, a](double t, const Vec3& x) { return s * a.u(t, x); };
    f.ut = [s, a](double t, const Vec3& x) { return s * a.ut(t, x); };
    f.grad = [s, a](double t, const Vec3& x) {
        Vec3 g = a.grad(t, x);
        return Vec3{s * g[0], s * g[1], s * g[2]};
    };
    return f;
}

double kirchhoff_lin(const WaveField& u, const SpacetimePoint& p, double r0, const SphereQuadrature& q) {
    double t0 = p.t - r0;
    double acc = 0.0;
    for (std::size_t k = 0; k < q.nodes.size(); ++k) {
        const Vec3& n = q.nodes[k];
        Vec3 y{p.x[0] + r0 * n[0], p.x[1] + r0 * n[1], p.x[2] + r0 * n[2]};
        Vec3 g = u.grad(t0, y);
        double dr = n[0] * g[0] + n[1] * g[1] + n[2] * g[2];
        acc += q.weights[k] * (r0 * u.ut(t0, y) + r0 * dr + u.u(t0, y));
    }
    return acc / (4.0 * std::numbers::pi);
}

KirchhoffScan kirchhoff_residual_scan(const WaveField& u, const std::vector<SpacetimePoint>& points,
                                      const std::vector<double>& r0_list, const SphereQuadrature& q) {
    KirchhoffScan scan;
    for (const SpacetimePoint& p : points)
        for (double r0 : r0_list) {
            KirchhoffEntry e;
            e.p = p;
            e.r0 = r0;
            e.value = kirchhoff_lin(u, p, r0, q);
            e.exact = u.u(p.t, p.x);
            e.residual = std::abs(e.value - e.exact);
            scan.max_residual = std::max(scan.max_residual, e.residual);
            scan.entries.push_back(e);
        }
    return scan;
}

}  // namespace mkg
