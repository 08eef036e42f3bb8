#pragma once

#include <array>
#include <functional>
#include <vector>

namespace mkg {

using Vec3 = std::array<double, 3>;

// Product Gauss–Legendre (cos θ) × trapezoid (azimuth) rule on the unit sphere.
struct SphereQuadrature {
    std::vector<Vec3> nodes;
    std::vector<double> weights;
    int order = 0;

    static SphereQuadrature product(int order);
};

// A scalar field u(t, x) with its time derivative and spatial gradient.
struct WaveField {
    std::function<double(double, const Vec3&)> u;
    std::function<double(double, const Vec3&)> ut;
    std::function<Vec3(double, const Vec3&)> grad;

    // Derivatives by 4th-order central differences with step h.
    static WaveField sampled(std::function<double(double, const Vec3&)> u, double h = 1e-3);
    static WaveField plane_wave(const Vec3& k, double amplitude = 1.0, double phase = 0.0);
    static WaveField constant(double c);
    static WaveField time_linear();
};

WaveField operator+(const WaveField& a, const WaveField& b);
WaveField operator*(double s, const WaveField& a);

struct SpacetimePoint {
    double t = 0.0;
    Vec3 x{};
};

// (1/4π) Σ w [r₀ ∂_t u + r₀ ∂_r u + u] on the sphere of radius r₀ about p at t₀ = t_p − r₀.
double kirchhoff_lin(const WaveField& u, const SpacetimePoint& p, double r0, const SphereQuadrature& q);

struct KirchhoffEntry {
    SpacetimePoint p;
    double r0 = 0.0;
    double value = 0.0;
    double exact = 0.0;
    double residual = 0.0;
};

struct KirchhoffScan {
    std::vector<KirchhoffEntry> entries;
    double max_residual = 0.0;
};

KirchhoffScan kirchhoff_residual_scan(const WaveField& u, const std::vector<SpacetimePoint>& points,
                                      const std::vector<double>& r0_list, const SphereQuadrature& q);

}  // namespace mkg
