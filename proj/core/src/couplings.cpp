#include "mkg/couplings.hpp"

#include <cmath>

#include <fmt/format.h>

#include "mkg/errors.hpp"

namespace mkg {

CouplingFamily CouplingFamily::identity(int n) {
    CouplingFamily f;
    f.n_gauge = n;
    f.h_base = SmallMat::Identity(n, n);
    f.h_mod = SmallMat::Zero(n, n);
    f.k_base = SmallMat::Zero(n, n);
    f.k_mod = SmallMat::Zero(n, n);
    return f;
}

namespace {

bool symmetric(const SmallMat& m) {
    return (m - m.transpose()).cwiseAbs().maxCoeff() <= 1e-14 * (1.0 + m.cwiseAbs().maxCoeff());
}

void check_shape(const SmallMat& m, int n, const char* name) {
    if (m.rows() != n || m.cols() != n) {
        throw InvalidFamily(fmt::format("{} must be {}x{}", name, n, n));
    }
    if (!symmetric(m)) throw InvalidFamily(fmt::format("{} must be symmetric", name));
}

SmallMat family_value(CouplingKind kind, const SmallMat& base, const SmallMat& mod, double amp, double s) {
    if (kind == CouplingKind::Constant) return base;
    return base + (amp * s) * mod;
}

SmallMat family_derivative(CouplingKind kind, const SmallMat& mod, double amp, double s) {
    if (kind == CouplingKind::Constant) return SmallMat::Zero(mod.rows(), mod.cols());
    return (amp * s) * mod;
}

}  // namespace

void CouplingFamily::validate() const {
    if (n_gauge < 1 || n_gauge > kMaxComponents) throw InvalidFamily("n_gauge out of range");
    check_shape(h_base, n_gauge, "h.base");
    check_shape(h_mod, n_gauge, "h.mod");
    check_shape(k_base, n_gauge, "k.base");
    check_shape(k_mod, n_gauge, "k.mod");
    Eigen::SelfAdjointEigenSolver<SmallMat> es(h_base, Eigen::EigenvaluesOnly);
    double lmin = es.eigenvalues().minCoeff();
    double mod_norm = 0.0;
    if (h_kind == CouplingKind::Saturating) {
        Eigen::SelfAdjointEigenSolver<SmallMat> em(h_mod, Eigen::EigenvaluesOnly);
        mod_norm = std::abs(h_amplitude) * em.eigenvalues().cwiseAbs().maxCoeff();
    }
    if (!(lmin > mod_norm)) {
        throw IndefiniteCoupling(
            fmt::format("lambda_min(h.base) = {} does not exceed |amplitude|·||h.mod||_2 = {}", lmin, mod_norm));
    }
}

ShapeValues saturating_shape(double psi) {
    double t = std::tanh(psi);
    double sech2 = 1.0 - t * t;
    return {t, sech2, -2.0 * t * sech2};
}

SmallMat eval_h(const CouplingFamily& f, double psi) {
    return family_value(f.h_kind, f.h_base, f.h_mod, f.h_amplitude, saturating_shape(psi).s0);
}

SmallMat eval_h_inverse(const CouplingFamily& f, double psi) {
    return eval_h(f, psi).llt().solve(SmallMat::Identity(f.n_gauge, f.n_gauge));
}

SmallMat eval_h_prime(const CouplingFamily& f, double psi) {
    return family_derivative(f.h_kind, f.h_mod, f.h_amplitude, saturating_shape(psi).s1);
}

SmallMat eval_h_second(const CouplingFamily& f, double psi) {
    return family_derivative(f.h_kind, f.h_mod, f.h_amplitude, saturating_shape(psi).s2);
}

SmallMat eval_k(const CouplingFamily& f, double psi) {
    return family_value(f.k_kind, f.k_base, f.k_mod, f.k_amplitude, saturating_shape(psi).s0);
}

SmallMat eval_k_prime(const CouplingFamily& f, double psi) {
    return family_derivative(f.k_kind, f.k_mod, f.k_amplitude, saturating_shape(psi).s1);
}

SmallMat eval_k_second(const CouplingFamily& f, double psi) {
    return family_derivative(f.k_kind, f.k_mod, f.k_amplitude, saturating_shape(psi).s2);
}

void eval_coupling_arrays(const CouplingFamily& f, double psi, double* h, double* hp, double* k, double* kp) {
    int n = f.n_gauge;
    bool hs = f.h_kind == CouplingKind::Saturating, ks = f.k_kind == CouplingKind::Saturating;
    ShapeValues sh = hs || ks ? saturating_shape(psi) : ShapeValues{0.0, 0.0, 0.0};
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) {
            int q = r * n + c;
            h[q] = hs ? f.h_base(r, c) + (f.h_amplitude * sh.s0) * f.h_mod(r, c) : f.h_base(r, c);
            hp[q] = hs ? (f.h_amplitude * sh.s1) * f.h_mod(r, c) : 0.0;
            k[q] = ks ? f.k_base(r, c) + (f.k_amplitude * sh.s0) * f.k_mod(r, c) : f.k_base(r, c);
            kp[q] = ks ? (f.k_amplitude * sh.s1) * f.k_mod(r, c) : 0.0;
        }
}

}  // namespace mkg
