#include "mkg/dynamics.hpp"

#include <cmath>

#include <fmt/format.h>

#include "mkg/errors.hpp"
#include "mkg/parallel.hpp"

namespace mkg {

namespace {

struct Prepared {
    int nv = 0;
    int nc = 0;
    std::size_t n = 0;
    std::vector<double> psi, psidot, vprime;
    std::vector<MetricScalars> ms;
    std::vector<double> h, hp, k, kp;  // [x][L][S]
    std::vector<cplx> U;               // [i][x]
    std::vector<cplx> D;               // [a][i][x], forward covariant difference on links
    std::vector<double> B, Bbar, Ebar; // [L][n][x]

    const double* hx(std::size_t x) const { return &h[x * nv * nv]; }
    const double* hpx(std::size_t x) const { return &hp[x * nv * nv]; }
    const double* kx(std::size_t x) const { return &k[x * nv * nv]; }
    const double* kpx(std::size_t x) const { return &kp[x * nv * nv]; }
    std::size_t g(int L, int i, std::size_t x) const { return (std::size_t(L) * 3 + i) * n + x; }
    std::size_t d(int a, int i, std::size_t x) const { return (std::size_t(a) * 3 + i) * n + x; }
};

// In-place Cholesky solve of the symmetric positive-definite system M z = b (M is overwritten).
void solve_spd(double* M, double* b, int n) {
    for (int j = 0; j < n; ++j) {
        double d = M[j * n + j];
        for (int k = 0; k < j; ++k) d -= M[j * n + k] * M[j * n + k];
        d = std::sqrt(d);
        M[j * n + j] = d;
        for (int i = j + 1; i < n; ++i) {
            double v = M[i * n + j];
            for (int k = 0; k < j; ++k) v -= M[i * n + k] * M[j * n + k];
            M[i * n + j] = v / d;
        }
    }
    for (int i = 0; i < n; ++i) {
        double v = b[i];
        for (int k = 0; k < i; ++k) v -= M[i * n + k] * b[k];
        b[i] = v / M[i * n + i];
    }
    for (int i = n - 1; i >= 0; --i) {
        double v = b[i];
        for (int k = i + 1; k < n; ++k) v -= M[k * n + i] * b[k];
        b[i] = v / M[i * n + i];
    }
}

double quad(const double* M, const double* u, const double* v, int nv) {
    double s = 0.0;
    for (int r = 0; r < nv; ++r)
        for (int c = 0; c < nv; ++c) s += u[r] * M[r * nv + c] * v[c];
    return s;
}

std::vector<double> site_average(const std::vector<double>& plaq, int nv, const Lattice& lat) {
    std::size_t n = lat.sites();
    std::vector<double> out(plaq.size());
    parallel_for(n, [&](std::size_t b, std::size_t e) {
        for (int L = 0; L < nv; ++L)
            for (int m = 0; m < 3; ++m) {
                int j = (m + 1) % 3, k = (m + 2) % 3;
                const double* P = &plaq[(std::size_t(L) * 3 + m) * n];
                double* o = &out[(std::size_t(L) * 3 + m) * n];
                for (std::size_t x = b; x < e; ++x) {
                    std::size_t xj = lat.bwd(j, x), xk = lat.bwd(k, x);
                    o[x] = 0.25 * (P[x] + P[xj] + P[xk] + P[lat.bwd(k, xj)]);
                }
            }
    });
    return out;
}

Prepared prepare(const FieldState& s, const Lattice& lat, const ModelSpec& model) {
    Prepared p;
    p.nv = s.n_gauge;
    p.nc = s.n_scalar;
    p.n = lat.sites();
    std::size_t n = p.n;
    int nv = p.nv, nc = p.nc;
    double dx = lat.dx();
    p.psi.resize(n);
    p.psidot.resize(n);
    p.vprime.resize(n);
    p.ms.resize(n);
    p.h.resize(n * nv * nv);
    p.hp.resize(n * nv * nv);
    p.k.resize(n * nv * nv);
    p.kp.resize(n * nv * nv);
    p.U.resize(3 * n);
    p.D.resize(std::size_t(nc) * 3 * n);
    p.Ebar.resize(std::size_t(nv) * 3 * n);

    double r_max = model.kahler.r_max;
    parallel_for(n, [&](std::size_t b, std::size_t e) {
        for (std::size_t x = b; x < e; ++x) {
            double psi = 0.0, pd = 0.0;
            for (int a = 0; a < nc; ++a) {
                cplx f = s.phi[s.sidx(a, x)];
                psi += std::norm(f);
                pd += 2.0 * std::real(std::conj(f) * s.pi[s.sidx(a, x)]);
            }
            double r = std::sqrt(psi);
            if (r > r_max)
                throw RadiusExceeded(fmt::format("|phi| = {} exceeds r_max = {} at site {}", r, r_max, x));
            MetricScalars m = model.kahler.scalars(r);
            if (!(m.c > 0.0) || !(m.c + m.Q * psi > 0.0))
                throw DegenerateMetric(fmt::format("metric not positive definite at site {}", x));
            p.psi[x] = psi;
            p.psidot[x] = pd;
            p.ms[x] = m;
            p.vprime[x] = eval_V_prime(model.potential, psi);
            std::size_t o = x * nv * nv;
            eval_coupling_arrays(model.couplings, psi, &p.h[o], &p.hp[o], &p.k[o], &p.kp[o]);
            for (int i = 0; i < 3; ++i) {
                cplx U = link_variable(s, model.charges, i, x, dx);
                p.U[std::size_t(i) * n + x] = U;
                std::size_t y = lat.fwd(i, x);
                for (int a = 0; a < nc; ++a)
                    p.D[p.d(a, i, x)] = (U * s.phi[s.sidx(a, y)] - s.phi[s.sidx(a, x)]) / dx;
            }
            for (int L = 0; L < nv; ++L)
                for (int i = 0; i < 3; ++i)
                    p.Ebar[p.g(L, i, x)] = 0.5 * (s.E[s.gidx(L, i, x)] + s.E[s.gidx(L, i, lat.bwd(i, x))]);
        }
    });
    p.B = plaquette_field(s.A, nv, lat);
    p.Bbar = site_average(p.B, nv, lat);
    return p;
}

// Σ_ab ḡ_ab u^a conj(w^b) with ḡ the metric averaged over the link end points y0, y1.
cplx link_metric_form(const FieldState& s, const Prepared& p, std::size_t y0, std::size_t y1,
                      const cplx* u, const cplx* w) {
    int nc = p.nc;
    cplx uw = 0.0;
    for (int a = 0; a < nc; ++a) uw += u[a] * std::conj(w[a]);
    cplx out = 0.0;
    for (std::size_t y : {y0, y1}) {
        cplx fu = 0.0, fw = 0.0;
        for (int a = 0; a < nc; ++a) {
            cplx f = s.phi[s.sidx(a, y)];
            fu += std::conj(f) * u[a];
            fw += f * std::conj(w[a]);
        }
        out += p.ms[y].c * uw + p.ms[y].Q * fu * fw;
    }
    return 0.5 * out;
}

}  // namespace

void check_radius(const FieldState& s, const ModelSpec& model) {
    for (std::size_t x = 0; x < s.sites; ++x) {
        double psi = 0.0;
        for (int a = 0; a < s.n_scalar; ++a) psi += std::norm(s.phi[s.sidx(a, x)]);
        if (std::sqrt(psi) > model.kahler.r_max)
            throw RadiusExceeded(fmt::format("|phi| = {} exceeds r_max = {} at site {}", std::sqrt(psi),
                                             model.kahler.r_max, x));
    }
}

StateDerivative eom_rhs(const FieldState& s, const Lattice& lat, const ModelSpec& model) {
    Prepared p = prepare(s, lat, model);
    std::size_t n = p.n;
    int nv = p.nv, nc = p.nc;
    double dx = lat.dx();

    // W_n(x) = h̃ B_n + plaquette mean of k Ē_n, the argument of the adjoint curl.
    std::vector<double> W(std::size_t(nv) * 3 * n);
    std::vector<double> BE = site_average(plaquette_field(s.E, nv, lat), nv, lat);
    parallel_for(n, [&](std::size_t b, std::size_t e) {
        for (std::size_t x = b; x < e; ++x)
            for (int m = 0; m < 3; ++m) {
                int j = (m + 1) % 3, k = (m + 2) % 3;
                std::size_t xj = lat.fwd(j, x);
                std::size_t corners[4] = {x, xj, lat.fwd(k, x), lat.fwd(k, xj)};
                for (int L = 0; L < nv; ++L) {
                    double w = 0.0;
                    for (std::size_t y : corners) {
                        const double* hy = p.hx(y);
                        const double* ky = p.kx(y);
                        for (int S = 0; S < nv; ++S)
                            w += hy[L * nv + S] * p.B[p.g(S, m, x)] + ky[L * nv + S] * p.Ebar[p.g(S, m, y)];
                    }
                    W[p.g(L, m, x)] = 0.25 * w;
                }
            }
    });

    StateDerivative out;
    out.dA.resize(s.A.size());
    out.dE.resize(s.E.size());
    out.dphi = s.pi;
    out.dpi.resize(s.pi.size());
    for (std::size_t q = 0; q < s.E.size(); ++q) out.dA[q] = -s.E[q];

    parallel_for(n, [&](std::size_t b, std::size_t e) {
        double rhs[kMaxComponents], hbar[kMaxComponents * kMaxComponents];
        cplx phix[kMaxComponents], Dl[kMaxComponents];
        for (std::size_t x = b; x < e; ++x) {
            for (int a = 0; a < nc; ++a) phix[a] = s.phi[s.sidx(a, x)];
            for (int i = 0; i < 3; ++i) {
                std::size_t y = lat.fwd(i, x);
                int j1 = (i + 1) % 3, n1 = (i + 2) % 3, j2 = (i + 2) % 3, n2 = (i + 1) % 3;
                for (int a = 0; a < nc; ++a) Dl[a] = p.D[p.d(a, i, x)];
                cplx current = link_metric_form(s, p, x, y, phix, Dl);
                const double *h0 = p.hx(x), *h1 = p.hx(y), *hp0 = p.hpx(x), *hp1 = p.hpx(y);
                const double *k0 = p.kx(x), *k1 = p.kx(y), *kp0 = p.kpx(x), *kp1 = p.kpx(y);
                double pd0 = p.psidot[x], pd1 = p.psidot[y];
                for (int L = 0; L < nv; ++L) {
                    double v = (W[p.g(L, n1, x)] - W[p.g(L, n1, lat.bwd(j1, x))]) / dx -
                               (W[p.g(L, n2, x)] - W[p.g(L, n2, lat.bwd(j2, x))]) / dx;
                    v += 2.0 * model.charges[L] * std::imag(current);
                    for (int S = 0; S < nv; ++S) {
                        int q = L * nv + S;
                        v -= 0.5 * (hp0[q] * pd0 + hp1[q] * pd1) * s.E[s.gidx(S, i, x)];
                        v += 0.5 * (kp0[q] * pd0 * p.Bbar[p.g(S, i, x)] + kp1[q] * pd1 * p.Bbar[p.g(S, i, y)]);
                        v -= 0.5 * (k0[q] * BE[p.g(S, i, x)] + k1[q] * BE[p.g(S, i, y)]);
                        hbar[q] = 0.5 * (h0[q] + h1[q]);
                    }
                    rhs[L] = v;
                }
                if (nv == 1) {
                    out.dE[s.gidx(0, i, x)] = rhs[0] / hbar[0];
                } else {
                    solve_spd(hbar, rhs, nv);
                    for (int L = 0; L < nv; ++L) out.dE[s.gidx(L, i, x)] = rhs[L];
                }
            }
        }
    });

    // Gᵀ D on every link, the flux entering the scalar gradient term.
    std::vector<cplx> T(p.D.size());
    parallel_for(n, [&](std::size_t b, std::size_t e) {
        for (std::size_t x = b; x < e; ++x)
            for (int i = 0; i < 3; ++i) {
                std::size_t y = lat.fwd(i, x);
                for (int a = 0; a < nc; ++a) T[p.d(a, i, x)] = 0.0;
                for (std::size_t z : {x, y}) {
                    cplx fd = 0.0;
                    for (int a = 0; a < nc; ++a) fd += std::conj(s.phi[s.sidx(a, z)]) * p.D[p.d(a, i, x)];
                    for (int a = 0; a < nc; ++a)
                        T[p.d(a, i, x)] += 0.5 * (p.ms[z].c * p.D[p.d(a, i, x)] + p.ms[z].Q * s.phi[s.sidx(a, z)] * fd);
                }
            }
    });

    parallel_for(n, [&](std::size_t b, std::size_t e) {
        cplx R[kMaxComponents];
        for (std::size_t x = b; x < e; ++x) {
            const MetricScalars& m = p.ms[x];
            const double* hp = p.hpx(x);
            const double* kp = p.kpx(x);
            double Ev[kMaxComponents], Bv[kMaxComponents], Bb[kMaxComponents];

            double scal = -p.vprime[x];
            for (int i = 0; i < 3; ++i) {
                for (std::size_t l : {x, lat.bwd(i, x)}) {
                    for (int L = 0; L < nv; ++L) Ev[L] = s.E[s.gidx(L, i, l)];
                    scal += 0.25 * quad(hp, Ev, Ev, nv);
                }
                for (int L = 0; L < nv; ++L) {
                    Ev[L] = p.Ebar[p.g(L, i, x)];
                    Bb[L] = p.Bbar[p.g(L, i, x)];
                }
                scal -= quad(kp, Ev, Bb, nv);
            }
            for (int mm = 0; mm < 3; ++mm) {
                int j = (mm + 1) % 3, k = (mm + 2) % 3;
                std::size_t xj = lat.bwd(j, x);
                for (std::size_t pl : {x, xj, lat.bwd(k, x), lat.bwd(k, xj)}) {
                    for (int L = 0; L < nv; ++L) Bv[L] = p.B[p.g(L, mm, pl)];
                    scal -= 0.125 * quad(hp, Bv, Bv, nv);
                }
            }

            cplx sp = 0.0;
            for (int a = 0; a < nc; ++a) sp += std::conj(s.phi[s.sidx(a, x)]) * s.pi[s.sidx(a, x)];
            for (int a = 0; a < nc; ++a) {
                cplx f = s.phi[s.sidx(a, x)];
                R[a] = -2.0 * m.Q * sp * s.pi[s.sidx(a, x)] - m.qp * sp * sp * f + f * scal;
            }
            for (int i = 0; i < 3; ++i) {
                std::size_t xb = lat.bwd(i, x);
                cplx Ub = std::conj(p.U[std::size_t(i) * n + xb]);
                for (int a = 0; a < nc; ++a) R[a] += (T[p.d(a, i, x)] - Ub * T[p.d(a, i, xb)]) / dx;
                for (std::size_t l : {x, xb}) {
                    double d2 = 0.0;
                    cplx fd = 0.0;
                    for (int a = 0; a < nc; ++a) {
                        cplx dv = p.D[p.d(a, i, l)];
                        d2 += std::norm(dv);
                        fd += std::conj(s.phi[s.sidx(a, x)]) * dv;
                    }
                    for (int a = 0; a < nc; ++a) {
                        cplx f = s.phi[s.sidx(a, x)];
                        R[a] -= 0.5 * (m.Q * f * d2 + m.Q * p.D[p.d(a, i, l)] * std::conj(fd) + m.qp * f * std::norm(fd));
                    }
                }
            }
            cplx fr = 0.0;
            for (int a = 0; a < nc; ++a) fr += std::conj(s.phi[s.sidx(a, x)]) * R[a];
            double coef = m.Q / (m.c + m.Q * p.psi[x]);
            for (int a = 0; a < nc; ++a)
                out.dpi[s.sidx(a, x)] = (R[a] - coef * s.phi[s.sidx(a, x)] * fr) / m.c;
        }
    });
    return out;
}

namespace {

void check_finite(const FieldState& y, long long step) {
    std::size_t n = y.sites;
    for (std::size_t q = 0; q < y.A.size(); ++q)
        if (!std::isfinite(y.A[q]) || !std::isfinite(y.E[q]))
            throw NonFinite(fmt::format("non-finite gauge field at step {}, site {}", step, q % n), step, q % n);
    for (std::size_t q = 0; q < y.phi.size(); ++q)
        if (!std::isfinite(y.phi[q].real()) || !std::isfinite(y.phi[q].imag()) || !std::isfinite(y.pi[q].real()) ||
            !std::isfinite(y.pi[q].imag()))
            throw NonFinite(fmt::format("non-finite scalar field at step {}, site {}", step, q % n), step, q % n);
}

}  // namespace

FieldState step_rk4(const FieldState& s, const Lattice& lat, const ModelSpec& model, double dt, long long step) {
    auto axpy = [&](const FieldState& base, const StateDerivative& d, double h) {
        FieldState y = base;
        parallel_for(base.A.size(), [&](std::size_t b, std::size_t e) {
            for (std::size_t q = b; q < e; ++q) {
                y.A[q] += h * d.dA[q];
                y.E[q] += h * d.dE[q];
            }
        });
        parallel_for(base.phi.size(), [&](std::size_t b, std::size_t e) {
            for (std::size_t q = b; q < e; ++q) {
                y.phi[q] += h * d.dphi[q];
                y.pi[q] += h * d.dpi[q];
            }
        });
        y.t = base.t + h;
        check_finite(y, step);
        return y;
    };
    check_finite(s, step);
    StateDerivative k1 = eom_rhs(s, lat, model);
    StateDerivative k2 = eom_rhs(axpy(s, k1, 0.5 * dt), lat, model);
    StateDerivative k3 = eom_rhs(axpy(s, k2, 0.5 * dt), lat, model);
    StateDerivative k4 = eom_rhs(axpy(s, k3, dt), lat, model);

    FieldState y = s;
    double w = dt / 6.0;
    parallel_for(s.A.size(), [&](std::size_t b, std::size_t e) {
        for (std::size_t q = b; q < e; ++q) {
            y.A[q] += w * (k1.dA[q] + 2.0 * k2.dA[q] + 2.0 * k3.dA[q] + k4.dA[q]);
            y.E[q] += w * (k1.dE[q] + 2.0 * k2.dE[q] + 2.0 * k3.dE[q] + k4.dE[q]);
        }
    });
    parallel_for(s.phi.size(), [&](std::size_t b, std::size_t e) {
        for (std::size_t q = b; q < e; ++q) {
            y.phi[q] += w * (k1.dphi[q] + 2.0 * k2.dphi[q] + 2.0 * k3.dphi[q] + k4.dphi[q]);
            y.pi[q] += w * (k1.dpi[q] + 2.0 * k2.dpi[q] + 2.0 * k3.dpi[q] + k4.dpi[q]);
        }
    });
    y.t = s.t + dt;

    check_finite(y, step);
    return y;
}

GaussResidual gauss_residual(const FieldState& s, const Lattice& lat, const ModelSpec& model) {
    Prepared p = prepare(s, lat, model);
    std::size_t n = p.n;
    int nv = p.nv, nc = p.nc;
    double dx = lat.dx();

    // Π_i = h̄ E_i − link average of k B̄_i.
    std::vector<double> Pi(s.E.size());
    parallel_for(n, [&](std::size_t b, std::size_t e) {
        for (std::size_t x = b; x < e; ++x)
            for (int i = 0; i < 3; ++i) {
                std::size_t y = lat.fwd(i, x);
                const double *h0 = p.hx(x), *h1 = p.hx(y), *k0 = p.kx(x), *k1 = p.kx(y);
                for (int L = 0; L < nv; ++L) {
                    double v = 0.0;
                    for (int S = 0; S < nv; ++S) {
                        int q = L * nv + S;
                        v += 0.5 * (h0[q] + h1[q]) * s.E[s.gidx(S, i, x)];
                        v -= 0.5 * (k0[q] * p.Bbar[p.g(S, i, x)] + k1[q] * p.Bbar[p.g(S, i, y)]);
                    }
                    Pi[s.gidx(L, i, x)] = v;
                }
            }
    });

    GaussResidual out;
    out.field.resize(std::size_t(nv) * n);
    std::vector<double> sq(n), mx(n);
    parallel_for(n, [&](std::size_t b, std::size_t e) {
        SmallVec C(nv);
        SmallMat hx(nv, nv);
        for (std::size_t x = b; x < e; ++x) {
            const MetricScalars& m = p.ms[x];
            cplx sp = 0.0;
            for (int a = 0; a < nc; ++a) sp += std::conj(s.phi[s.sidx(a, x)]) * s.pi[s.sidx(a, x)];
            cplx charge = 0.0;
            for (int a = 0; a < nc; ++a) {
                cplx f = s.phi[s.sidx(a, x)];
                cplx pa = m.c * s.pi[s.sidx(a, x)] + m.Q * f * sp;
                charge += std::conj(pa) * f;
            }
            for (int L = 0; L < nv; ++L) {
                double div = 0.0;
                for (int i = 0; i < 3; ++i) div += (Pi[s.gidx(L, i, x)] - Pi[s.gidx(L, i, lat.bwd(i, x))]) / dx;
                C(L) = div - 2.0 * model.charges[L] * std::imag(charge);
                for (int S = 0; S < nv; ++S) hx(L, S) = p.hx(x)[L * nv + S];
            }
            SmallVec r = nv == 1 ? SmallVec(C / hx(0, 0)) : SmallVec(hx.llt().solve(C));
            double s2 = 0.0, m2 = 0.0;
            for (int L = 0; L < nv; ++L) {
                out.field[std::size_t(L) * n + x] = r(L);
                s2 += r(L) * r(L);
                m2 = std::max(m2, std::abs(r(L)));
            }
            sq[x] = s2;
            mx[x] = m2;
        }
    });
    out.l2 = std::sqrt(deterministic_sum(sq) * lat.spec().cell_volume());
    out.linf = deterministic_max(mx);
    return out;
}

FieldState gauge_transform(const FieldState& s, const Lattice& lat, const ModelSpec& model,
                           const std::vector<double>& theta) {
    std::size_t n = lat.sites();
    int nv = s.n_gauge, nc = s.n_scalar;
    if (theta.size() != std::size_t(nv) * n) throw InvalidFamily("theta must have n_gauge * sites entries");
    FieldState y = s;
    double dx = lat.dx();
    parallel_for(n, [&](std::size_t b, std::size_t e) {
        for (std::size_t x = b; x < e; ++x) {
            double phase = 0.0;
            for (int L = 0; L < nv; ++L) {
                phase += model.charges[L] * theta[std::size_t(L) * n + x];
                for (int i = 0; i < 3; ++i)
                    y.A[s.gidx(L, i, x)] +=
                        (theta[std::size_t(L) * n + lat.fwd(i, x)] - theta[std::size_t(L) * n + x]) / dx;
            }
            cplx rot = std::polar(1.0, phase);
            for (int a = 0; a < nc; ++a) {
                y.phi[s.sidx(a, x)] *= rot;
                y.pi[s.sidx(a, x)] *= rot;
            }
        }
    });
    return y;
}

namespace {

struct EnergyParts {
    double kinetic = 0.0;
    double topological = 0.0;
    double potential = 0.0;
};

EnergyParts energy_parts(const FieldState& s, const Lattice& lat, const ModelSpec& model) {
    Prepared p = prepare(s, lat, model);
    std::size_t n = p.n;
    int nv = p.nv, nc = p.nc;
    std::vector<double> kin(n), top(n), pot(n);
    parallel_for(n, [&](std::size_t b, std::size_t e) {
        double u[kMaxComponents], v[kMaxComponents];
        cplx Dl[kMaxComponents];
        for (std::size_t x = b; x < e; ++x) {
            const MetricScalars& m = p.ms[x];
            double K = 0.0, T = 0.0, P = eval_V(model.potential, p.psi[x]);
            cplx sp = 0.0;
            double pi2 = 0.0;
            for (int a = 0; a < nc; ++a) {
                sp += std::conj(s.phi[s.sidx(a, x)]) * s.pi[s.sidx(a, x)];
                pi2 += std::norm(s.pi[s.sidx(a, x)]);
            }
            K += m.c * pi2 + m.Q * std::norm(sp);
            for (int i = 0; i < 3; ++i) {
                std::size_t y = lat.fwd(i, x);
                double hb[kMaxComponents * kMaxComponents];
                for (int q = 0; q < nv * nv; ++q) hb[q] = 0.5 * (p.hx(x)[q] + p.hx(y)[q]);
                for (int L = 0; L < nv; ++L) {
                    u[L] = s.E[s.gidx(L, i, x)];
                    v[L] = p.Ebar[p.g(L, i, x)];
                }
                K += 0.5 * quad(hb, u, u, nv);
                for (int L = 0; L < nv; ++L) u[L] = p.Bbar[p.g(L, i, x)];
                T -= quad(p.kx(x), v, u, nv);
                for (int a = 0; a < nc; ++a) Dl[a] = p.D[p.d(a, i, x)];
                P += std::real(link_metric_form(s, p, x, y, Dl, Dl));
            }
            for (int mm = 0; mm < 3; ++mm) {
                int j = (mm + 1) % 3, k = (mm + 2) % 3;
                std::size_t xj = lat.fwd(j, x);
                double ht[kMaxComponents * kMaxComponents];
                for (int q = 0; q < nv * nv; ++q)
                    ht[q] = 0.25 * (p.hx(x)[q] + p.hx(xj)[q] + p.hx(lat.fwd(k, x))[q] + p.hx(lat.fwd(k, xj))[q]);
                for (int L = 0; L < nv; ++L) u[L] = p.B[p.g(L, mm, x)];
                P += 0.5 * quad(ht, u, u, nv);
            }
            kin[x] = K;
            top[x] = T;
            pot[x] = P;
        }
    });
    double vol = lat.spec().cell_volume();
    return {deterministic_sum(kin) * vol, deterministic_sum(top) * vol, deterministic_sum(pot) * vol};
}

}  // namespace

double lagrangian(const FieldState& s, const Lattice& lat, const ModelSpec& model) {
    EnergyParts e = energy_parts(s, lat, model);
    return e.kinetic + e.topological - e.potential;
}

double hamiltonian(const FieldState& s, const Lattice& lat, const ModelSpec& model) {
    EnergyParts e = energy_parts(s, lat, model);
    return e.kinetic + e.potential;
}

}  // namespace mkg
