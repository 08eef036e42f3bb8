#include "mkg/potential.hpp"

#include <cmath>

#include <fmt/format.h>

#include "mkg/errors.hpp"

namespace mkg {

PotentialFamily PotentialFamily::zero() { return polynomial({}); }

PotentialFamily PotentialFamily::polynomial(std::vector<double> a) {
    PotentialFamily f;
    f.kind = PotentialKind::Polynomial;
    f.coefficients = std::move(a);
    return f;
}

PotentialFamily PotentialFamily::sine_gordon(double v0, double lambda) {
    PotentialFamily f;
    f.kind = PotentialKind::SineGordon;
    f.v0 = v0;
    f.lambda = lambda;
    return f;
}

PotentialFamily PotentialFamily::toda_sum(std::vector<std::pair<double, double>> pairs) {
    PotentialFamily f;
    f.kind = PotentialKind::Toda;
    f.toda = std::move(pairs);
    return f;
}

std::vector<std::string> PotentialFamily::validate() const {
    std::vector<std::string> warnings;
    bool negative_toda = false;
    if (kind == PotentialKind::Toda) {
        for (auto [a, l] : toda) {
            if (!(l > 0.0)) throw InvalidFamily(fmt::format("Toda exponent {} must be positive", l));
            if (a < 0.0) negative_toda = true;
        }
    }
    if (!(psi_max > 0.0)) throw InvalidFamily("psi_max must be positive");
    constexpr int kScan = 10000;
    for (int i = 0; i <= kScan; ++i) {
        double psi = psi_max * i / kScan;
        double v = eval_V(*this, psi);
        if (v < 0.0) {
            std::string msg = fmt::format("V({}) = {} is negative", psi, v);
            if (kind == PotentialKind::Toda && negative_toda) {
                warnings.push_back(msg);
                break;
            }
            throw InvalidFamily(msg);
        }
    }
    return warnings;
}

double eval_V(const PotentialFamily& f, double psi) {
    switch (f.kind) {
        case PotentialKind::Polynomial: {
            double s = 0.0;
            for (std::size_t n = f.coefficients.size(); n-- > 0;) s = s * psi + f.coefficients[n];
            return s;
        }
        case PotentialKind::SineGordon:
            return f.v0 * (1.0 - std::cos(f.lambda * psi));
        case PotentialKind::Toda: {
            double s = 0.0;
            for (auto [a, l] : f.toda) s += a * std::exp(-l * psi);
            return s;
        }
    }
    return 0.0;
}

double eval_V_prime(const PotentialFamily& f, double psi) {
    switch (f.kind) {
        case PotentialKind::Polynomial: {
            double s = 0.0;
            for (std::size_t n = f.coefficients.size(); n-- > 1;) s = s * psi + n * f.coefficients[n];
            return s;
        }
        case PotentialKind::SineGordon:
            return f.v0 * f.lambda * std::sin(f.lambda * psi);
        case PotentialKind::Toda: {
            double s = 0.0;
            for (auto [a, l] : f.toda) s -= a * l * std::exp(-l * psi);
            return s;
        }
    }
    return 0.0;
}

double eval_V_second(const PotentialFamily& f, double psi) {
    switch (f.kind) {
        case PotentialKind::Polynomial: {
            double s = 0.0;
            for (std::size_t n = f.coefficients.size(); n-- > 2;) s = s * psi + n * (n - 1) * f.coefficients[n];
            return s;
        }
        case PotentialKind::SineGordon:
            return f.v0 * f.lambda * f.lambda * std::cos(f.lambda * psi);
        case PotentialKind::Toda: {
            double s = 0.0;
            for (auto [a, l] : f.toda) s += a * l * l * std::exp(-l * psi);
            return s;
        }
    }
    return 0.0;
}

std::vector<cplx> grad_V(const PotentialFamily& f, std::span<const cplx> phi) {
    double psi = 0.0;
    for (auto z : phi) psi += std::norm(z);
    double vp = eval_V_prime(f, psi);
    std::vector<cplx> g(phi.size());
    for (std::size_t d = 0; d < phi.size(); ++d) g[d] = vp * std::conj(phi[d]);
    return g;
}

}  // namespace mkg
