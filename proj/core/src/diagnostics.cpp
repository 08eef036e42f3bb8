#include "mkg/diagnostics.hpp"

#include <cmath>

#include "mkg/errors.hpp"
#include "mkg/parallel.hpp"

namespace mkg {

namespace {

constexpr double kEta[4] = {-1.0, 1.0, 1.0, 1.0};

using Mat4 = std::array<std::array<double, 4>, 4>;

Mat4 lower_tensor(const FieldStrength& F, int L, std::size_t x) {
    Mat4 m{};
    auto put = [&](int a, int b, double v) {
        m[a][b] = v;
        m[b][a] = -v;
    };
    put(0, 1, F(L, F01, x));
    put(0, 2, F(L, F02, x));
    put(0, 3, F(L, F03, x));
    put(1, 2, F(L, F12, x));
    put(1, 3, F(L, F13, x));
    put(2, 3, F(L, F23, x));
    return m;
}

MetricScalars phi_form_scalars(const KahlerFamily& k, double r) {
    if (r < kSmallRadius) return k.scalars(r);
    RadialDerivatives d = k.radial(r);
    return {d.d1 / (2.0 * r), (d.d2 - d.d1 / r) / (4.0 * r * r), 0.0};
}

}  // namespace

StressTensor stress_energy(const FieldState& s, const Lattice& lat, const ModelSpec& model, std::size_t site) {
    int nv = s.n_gauge, nc = s.n_scalar;
    std::size_t n = lat.sites();
    if (site >= n) throw InvalidFamily("site index out of range");
    FieldStrength F = field_strength(s, lat);
    FieldStrength Fd = hodge_dual(F);
    auto Dphi = covariant_derivative(s, lat, model.charges);

    double psi = 0.0;
    std::vector<cplx> phi(nc);
    for (int a = 0; a < nc; ++a) {
        phi[a] = s.phi[s.sidx(a, site)];
        psi += std::norm(phi[a]);
    }
    SmallMat h = eval_h(model.couplings, psi);
    HermitianMatrixField g = kahler_metric(model.kahler, phi);
    double V = eval_V(model.potential, psi);

    StressTensor T{};
    for (int L = 0; L < nv; ++L)
        for (int S = 0; S < nv; ++S) {
            Mat4 FL = lower_tensor(F, L, site), FS = lower_tensor(F, S, site), DS = lower_tensor(Fd, S, site);
            for (int mu = 0; mu < 4; ++mu)
                for (int nu = 0; nu < 4; ++nu) {
                    double acc = 0.0;
                    for (int ga = 0; ga < 4; ++ga)
                        acc += kEta[mu] * kEta[nu] * kEta[ga] * FL[mu][ga] * (FS[nu][ga] + DS[nu][ga]);
                    T[mu][nu] += 0.5 * h(L, S) * acc;
                }
        }

    auto D = [&](int a, int mu) { return Dphi[(std::size_t(a) * 4 + mu) * n + site]; };
    double contraction = 0.0;
    for (int mu = 0; mu < 4; ++mu)
        for (int nu = 0; nu < 4; ++nu) {
            cplx acc = 0.0;
            for (int a = 0; a < nc; ++a)
                for (int b = 0; b < nc; ++b) acc += g(a, b) * D(a, mu) * std::conj(D(b, nu));
            T[mu][nu] += 2.0 * kEta[mu] * kEta[nu] * std::real(acc);
            if (mu == nu) contraction += kEta[mu] * std::real(acc);
        }
    for (int mu = 0; mu < 4; ++mu) T[mu][mu] -= kEta[mu] * (contraction + V);
    return T;
}

double energy_E0(const FieldState& s, const Lattice& lat, const ModelSpec& model) {
    return hamiltonian(s, lat, model);
}

double energy_E0_phi_form(const FieldState& s, const Lattice& lat, const ModelSpec& model) {
    std::size_t n = lat.sites();
    int nv = s.n_gauge, nc = s.n_scalar;
    double dx = lat.dx();
    auto B = plaquette_field(s.A, nv, lat);
    std::vector<MetricScalars> ms(n);
    std::vector<SmallMat> h(n);
    std::vector<double> psi(n);
    for (std::size_t x = 0; x < n; ++x) {
        for (int a = 0; a < nc; ++a) psi[x] += std::norm(s.phi[s.sidx(a, x)]);
        ms[x] = phi_form_scalars(model.kahler, std::sqrt(psi[x]));
        h[x] = eval_h(model.couplings, psi[x]);
    }
    // Scalar kinetic density c|u|² + Q|φ̄·u|² at site y.
    auto form = [&](std::size_t y, const std::vector<cplx>& u) {
        double u2 = 0.0;
        cplx fu = 0.0;
        for (int a = 0; a < nc; ++a) {
            u2 += std::norm(u[a]);
            fu += std::conj(s.phi[s.sidx(a, y)]) * u[a];
        }
        return ms[y].c * u2 + ms[y].Q * std::norm(fu);
    };
    std::vector<double> dens(n);
    std::vector<cplx> u(nc);
    for (std::size_t x = 0; x < n; ++x) {
        double acc = eval_V(model.potential, psi[x]);
        for (int a = 0; a < nc; ++a) u[a] = s.pi[s.sidx(a, x)];
        acc += form(x, u);
        for (int i = 0; i < 3; ++i) {
            std::size_t y = lat.fwd(i, x);
            SmallMat hb = 0.5 * (h[x] + h[y]);
            for (int L = 0; L < nv; ++L)
                for (int S = 0; S < nv; ++S) acc += 0.5 * hb(L, S) * s.E[s.gidx(L, i, x)] * s.E[s.gidx(S, i, x)];
            cplx U = link_variable(s, model.charges, i, x, dx);
            for (int a = 0; a < nc; ++a) u[a] = (U * s.phi[s.sidx(a, y)] - s.phi[s.sidx(a, x)]) / dx;
            acc += 0.5 * (form(x, u) + form(y, u));
            int j = (i + 1) % 3, k = (i + 2) % 3;
            std::size_t xj = lat.fwd(j, x);
            SmallMat ht = 0.25 * (h[x] + h[xj] + h[lat.fwd(k, x)] + h[lat.fwd(k, xj)]);
            for (int L = 0; L < nv; ++L)
                for (int S = 0; S < nv; ++S)
                    acc += 0.5 * ht(L, S) * B[(std::size_t(L) * 3 + i) * n + x] * B[(std::size_t(S) * 3 + i) * n + x];
        }
        dens[x] = acc;
    }
    return deterministic_sum(dens) * lat.spec().cell_volume();
}

double flat_energy_J(const NormSnapshot& snap, double c1) {
    return snap.l2_E + snap.l2_H + 0.5 * c1 * snap.l2_Dphi + snap.l2_phi + snap.l2_V;
}

SobolevEnergies sobolev_energies(const FieldState& s, const Lattice& lat, double m) {
    if (!(m > 0.0)) throw InvalidFamily("Sobolev mass must be positive");
    std::size_t n = lat.sites();
    int order = lat.spec().stencil_order;
    std::vector<double> e0(n), e1(n);

    auto accumulate_real = [&](const double* f, bool with_value, double weight0) {
        std::span<const double> fs(f, n);
        std::vector<double> d1(n);
        for (int j = 0; j < 3; ++j) {
            parallel_for(n, [&](std::size_t b, std::size_t e) {
                for (std::size_t x = b; x < e; ++x) {
                    d1[x] = central_diff(fs, lat, j, x, order);
                    e0[x] += 0.5 * d1[x] * d1[x];
                }
            });
            for (int k = 0; k < 3; ++k)
                parallel_for(n, [&](std::size_t b, std::size_t e) {
                    for (std::size_t x = b; x < e; ++x) {
                        double dd = central_diff(d1, lat, k, x, order);
                        e1[x] += 0.5 * dd * dd;
                    }
                });
        }
        if (with_value)
            for (std::size_t x = 0; x < n; ++x) e0[x] += 0.5 * weight0 * f[x] * f[x];
    };

    // 𝖤₀ ∋ E², ∂A², mA²; 𝖤₁ ∋ ∂E², ∂∂A².
    for (int L = 0; L < s.n_gauge; ++L)
        for (int i = 0; i < 3; ++i) {
            const double* Ei = &s.E[s.gidx(L, i, 0)];
            const double* Ai = &s.A[s.gidx(L, i, 0)];
            std::span<const double> es(Ei, n);
            for (std::size_t x = 0; x < n; ++x) e0[x] += 0.5 * Ei[x] * Ei[x];
            for (int j = 0; j < 3; ++j)
                for (std::size_t x = 0; x < n; ++x) {
                    double d = central_diff(es, lat, j, x, order);
                    e1[x] += 0.5 * d * d;
                }
            accumulate_real(Ai, true, m);
        }

    auto split = [&](const std::vector<cplx>& v, int a, bool imag) {
        std::vector<double> out(n);
        for (std::size_t x = 0; x < n; ++x) out[x] = imag ? v[s.sidx(a, x)].imag() : v[s.sidx(a, x)].real();
        return out;
    };
    for (int a = 0; a < s.n_scalar; ++a)
        for (bool im : {false, true}) {
            auto p = split(s.pi, a, im);
            auto f = split(s.phi, a, im);
            for (std::size_t x = 0; x < n; ++x) e0[x] += 0.5 * p[x] * p[x];
            for (int j = 0; j < 3; ++j)
                for (std::size_t x = 0; x < n; ++x) {
                    double d = central_diff(p, lat, j, x, order);
                    e1[x] += 0.5 * d * d;
                }
            accumulate_real(f.data(), true, m);
        }

    double vol = lat.spec().cell_volume();
    return {deterministic_sum(e0) * vol, deterministic_sum(e1) * vol};
}

DiagnosticsRecord diagnose(const FieldState& s, const Lattice& lat, const ModelSpec& model, double m, double c1) {
    DiagnosticsRecord r;
    r.t = s.t;
    r.mass_m = m;
    r.energy_E0 = energy_E0(s, lat, model);
    r.norm_snapshot = norms(s, lat, model);
    r.flat_J = flat_energy_J(r.norm_snapshot, c1);
    SobolevEnergies se = sobolev_energies(s, lat, m);
    r.sobolev_E0 = se.E0;
    r.sobolev_E1 = se.E1;
    GaussResidual g = gauss_residual(s, lat, model);
    r.gauss_res_l2 = g.l2;
    r.gauss_res_linf = g.linf;
    r.bianchi_res_linf = bianchi_residual(s, lat);
    return r;
}

}  // namespace mkg
