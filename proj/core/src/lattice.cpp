#include "mkg/lattice.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include <fmt/format.h>

#include "mkg/errors.hpp"
#include "mkg/parallel.hpp"

namespace mkg {

void LatticeSpec::validate() const {
    for (int d = 0; d < 3; ++d)
        if (dims[d] < 1) throw ValidationError("lattice.dims", "every dimension must be at least 1");
    if (!(dx > 0.0) || !std::isfinite(dx)) throw ValidationError("lattice.dx", "must be positive and finite");
    if (stencil_order != 2 && stencil_order != 4)
        throw ValidationError("integrator.stencil_order", "must be 2 or 4");
}

Lattice::Lattice(const LatticeSpec& spec) : spec_(spec), n_(spec.sites()) {
    spec_.validate();
    for (int d = 0; d < 3; ++d) {
        fwd_[d].resize(n_);
        bwd_[d].resize(n_);
    }
    for (std::size_t x = 0; x < n_; ++x) {
        auto c = coords(x);
        for (int d = 0; d < 3; ++d) {
            auto up = c, dn = c;
            up[d] = (c[d] + 1) % spec_.dims[d];
            dn[d] = (c[d] + spec_.dims[d] - 1) % spec_.dims[d];
            fwd_[d][x] = std::uint32_t(index(up[0], up[1], up[2]));
            bwd_[d][x] = std::uint32_t(index(dn[0], dn[1], dn[2]));
        }
    }
}

std::size_t Lattice::index(int ix, int iy, int iz) const {
    return std::size_t(ix) + std::size_t(spec_.dims[0]) * (std::size_t(iy) + std::size_t(spec_.dims[1]) * iz);
}

std::array<int, 3> Lattice::coords(std::size_t x) const {
    int nx = spec_.dims[0], ny = spec_.dims[1];
    return {int(x % nx), int((x / nx) % ny), int(x / (std::size_t(nx) * ny))};
}

std::array<double, 3> Lattice::position(std::size_t x) const {
    auto c = coords(x);
    return {c[0] * spec_.dx, c[1] * spec_.dx, c[2] * spec_.dx};
}

FieldState::FieldState(int nv, int nc, std::size_t n)
    : n_gauge(nv), n_scalar(nc), sites(n), A(std::size_t(nv) * 3 * n), E(std::size_t(nv) * 3 * n),
      phi(std::size_t(nc) * n), pi(std::size_t(nc) * n) {}

FieldStrength::FieldStrength(int nv, std::size_t n) : n_gauge(nv), sites(n), F(std::size_t(nv) * 6 * n) {}

std::vector<double> plaquette_field(const std::vector<double>& A, int nv, const Lattice& lat) {
    std::size_t n = lat.sites();
    double inv = 1.0 / lat.dx();
    std::vector<double> B(std::size_t(nv) * 3 * n);
    parallel_for(n, [&](std::size_t b, std::size_t e) {
        for (int L = 0; L < nv; ++L)
            for (int m = 0; m < 3; ++m) {
                int j = (m + 1) % 3, k = (m + 2) % 3;
                const double* Aj = &A[(std::size_t(L) * 3 + j) * n];
                const double* Ak = &A[(std::size_t(L) * 3 + k) * n];
                double* out = &B[(std::size_t(L) * 3 + m) * n];
                for (std::size_t x = b; x < e; ++x)
                    out[x] = (Ak[lat.fwd(j, x)] - Ak[x] - Aj[lat.fwd(k, x)] + Aj[x]) * inv;
            }
    });
    return B;
}

FieldStrength field_strength(const FieldState& s, const Lattice& lat) {
    std::size_t n = lat.sites();
    int nv = s.n_gauge;
    FieldStrength F(nv, n);
    auto B = plaquette_field(s.A, nv, lat);
    parallel_for(n, [&](std::size_t b, std::size_t e) {
        for (int L = 0; L < nv; ++L)
            for (std::size_t x = b; x < e; ++x) {
                for (int i = 0; i < 3; ++i)
                    F(L, F01 + i, x) = -0.5 * (s.E[s.gidx(L, i, x)] + s.E[s.gidx(L, i, lat.bwd(i, x))]);
                double bbar[3];
                for (int m = 0; m < 3; ++m) {
                    int j = (m + 1) % 3, k = (m + 2) % 3;
                    const double* Bm = &B[(std::size_t(L) * 3 + m) * n];
                    std::size_t xj = lat.bwd(j, x), xk = lat.bwd(k, x);
                    bbar[m] = 0.25 * (Bm[x] + Bm[xj] + Bm[xk] + Bm[lat.bwd(k, xj)]);
                }
                F(L, F12, x) = bbar[2];
                F(L, F13, x) = -bbar[1];
                F(L, F23, x) = bbar[0];
            }
    });
    return F;
}

FieldStrength hodge_dual(const FieldStrength& F) {
    FieldStrength D(F.n_gauge, F.sites);
    for (int L = 0; L < F.n_gauge; ++L)
        for (std::size_t x = 0; x < F.sites; ++x) {
            D(L, F01, x) = -F(L, F23, x);
            D(L, F02, x) = F(L, F13, x);
            D(L, F03, x) = -F(L, F12, x);
            D(L, F12, x) = F(L, F03, x);
            D(L, F13, x) = -F(L, F02, x);
            D(L, F23, x) = F(L, F01, x);
        }
    return D;
}

cplx link_variable(const FieldState& s, std::span<const double> charges, int i, std::size_t x, double dx) {
    double theta = 0.0;
    for (int L = 0; L < s.n_gauge; ++L) theta += charges[L] * s.A[s.gidx(L, i, x)];
    return std::polar(1.0, -dx * theta);
}

std::vector<cplx> covariant_derivative(const FieldState& s, const Lattice& lat, std::span<const double> charges) {
    std::size_t n = lat.sites();
    int nc = s.n_scalar;
    double dx = lat.dx();
    std::vector<cplx> D(std::size_t(nc) * 4 * n);
    parallel_for(n, [&](std::size_t b, std::size_t e) {
        for (std::size_t x = b; x < e; ++x) {
            cplx U[3], Ub[3];
            for (int i = 0; i < 3; ++i) {
                U[i] = link_variable(s, charges, i, x, dx);
                Ub[i] = std::conj(link_variable(s, charges, i, lat.bwd(i, x), dx));
            }
            for (int a = 0; a < nc; ++a) {
                D[(std::size_t(a) * 4) * n + x] = s.pi[s.sidx(a, x)];
                for (int i = 0; i < 3; ++i) {
                    cplx up = U[i] * s.phi[s.sidx(a, lat.fwd(i, x))];
                    cplx dn = Ub[i] * s.phi[s.sidx(a, lat.bwd(i, x))];
                    D[(std::size_t(a) * 4 + 1 + i) * n + x] = (up - dn) / (2.0 * dx);
                }
            }
        }
    });
    return D;
}

template <class T>
static T central_diff_impl(std::span<const T> f, const Lattice& lat, int d, std::size_t x, int order) {
    std::size_t p = lat.fwd(d, x), m = lat.bwd(d, x);
    if (order == 4) {
        std::size_t pp = lat.fwd(d, p), mm = lat.bwd(d, m);
        return (8.0 * (f[p] - f[m]) - (f[pp] - f[mm])) / (12.0 * lat.dx());
    }
    return (f[p] - f[m]) / (2.0 * lat.dx());
}

double central_diff(std::span<const double> f, const Lattice& lat, int d, std::size_t x, int order) {
    return central_diff_impl<double>(f, lat, d, x, order);
}

cplx central_diff(std::span<const cplx> f, const Lattice& lat, int d, std::size_t x, int order) {
    return central_diff_impl<cplx>(f, lat, d, x, order);
}

NormSnapshot norms(const FieldState& s, const Lattice& lat, const ModelSpec& model) {
    std::size_t n = lat.sites();
    int nv = s.n_gauge, nc = s.n_scalar;
    double dx = lat.dx();
    int order = lat.spec().stencil_order;
    auto F = field_strength(s, lat);
    auto B = plaquette_field(s.A, nv, lat);

    enum { kPhi, kDphi, kCovD, kF, kA, kDPsi, kE2, kH2, kD2, kPhi2, kV2, kCount };
    std::vector<std::vector<double>> col(kCount, std::vector<double>(n));

    parallel_for(n, [&](std::size_t b, std::size_t e) {
        for (std::size_t x = b; x < e; ++x) {
            double psi = 0.0, pi2 = 0.0, dpsi_t = 0.0;
            for (int a = 0; a < nc; ++a) {
                cplx p = s.phi[s.sidx(a, x)], q = s.pi[s.sidx(a, x)];
                psi += std::norm(p);
                pi2 += std::norm(q);
                dpsi_t += 2.0 * std::real(std::conj(p) * q);
            }
            double dphi = std::sqrt(pi2);
            double dpsi2 = dpsi_t * dpsi_t;
            double cov_central = 0.0, cov_link = 0.0;
            for (int i = 0; i < 3; ++i) {
                double g2 = 0.0, dpsi_i = 0.0, c2 = 0.0, l2 = 0.0;
                cplx U = link_variable(s, model.charges, i, x, dx);
                cplx Ub = std::conj(link_variable(s, model.charges, i, lat.bwd(i, x), dx));
                for (int a = 0; a < nc; ++a) {
                    std::span<const cplx> fa(&s.phi[s.sidx(a, 0)], n);
                    cplx g = central_diff(fa, lat, i, x, order);
                    g2 += std::norm(g);
                    dpsi_i += 2.0 * std::real(std::conj(fa[x]) * g);
                    c2 += std::norm((U * fa[lat.fwd(i, x)] - Ub * fa[lat.bwd(i, x)]) / (2.0 * dx));
                    l2 += std::norm((U * fa[lat.fwd(i, x)] - fa[x]) / dx);
                }
                dphi = std::max(dphi, std::sqrt(g2));
                dpsi2 += dpsi_i * dpsi_i;
                cov_central += c2;
                cov_link += l2;
            }
            double ff = 0.0, a2 = 0.0, e2 = 0.0, h2 = 0.0;
            for (int L = 0; L < nv; ++L) {
                for (int c = F01; c <= F03; ++c) ff -= F(L, c, x) * F(L, c, x);
                for (int c = F12; c <= F23; ++c) ff += F(L, c, x) * F(L, c, x);
                for (int i = 0; i < 3; ++i) {
                    a2 += s.A[s.gidx(L, i, x)] * s.A[s.gidx(L, i, x)];
                    e2 += s.E[s.gidx(L, i, x)] * s.E[s.gidx(L, i, x)];
                    double bm = B[(std::size_t(L) * 3 + i) * n + x];
                    h2 += bm * bm;
                }
            }
            double v = eval_V(model.potential, psi);
            col[kPhi][x] = std::sqrt(psi);
            col[kDphi][x] = dphi;
            col[kCovD][x] = std::sqrt(std::abs(cov_central - pi2));
            col[kF][x] = std::sqrt(std::abs(2.0 * ff));
            col[kA][x] = std::sqrt(a2);
            col[kDPsi][x] = std::sqrt(dpsi2);
            col[kE2][x] = e2;
            col[kH2][x] = h2;
            col[kD2][x] = pi2 + cov_link;
            col[kPhi2][x] = psi;
            col[kV2][x] = v * v;
        }
    });

    double vol = lat.spec().cell_volume();
    auto l2 = [&](int k) { return std::sqrt(deterministic_sum(col[k]) * vol); };
    NormSnapshot out;
    out.t = s.t;
    out.linf_phi = deterministic_max(col[kPhi]);
    out.linf_dphi = deterministic_max(col[kDphi]);
    out.linf_Dphi = deterministic_max(col[kCovD]);
    out.linf_F = deterministic_max(col[kF]);
    out.linf_A = deterministic_max(col[kA]);
    out.linf_dPsi = deterministic_max(col[kDPsi]);
    out.l2_E = l2(kE2);
    out.l2_H = l2(kH2);
    out.l2_Dphi = l2(kD2);
    out.l2_phi = l2(kPhi2);
    out.l2_V = l2(kV2);
    return out;
}

double bianchi_residual(const FieldStrength& F, const Lattice& lat) {
    std::size_t n = lat.sites();
    std::vector<double> r(n);
    parallel_for(n, [&](std::size_t b, std::size_t e) {
        for (std::size_t x = b; x < e; ++x) {
            double worst = 0.0;
            for (int L = 0; L < F.n_gauge; ++L) {
                std::span<const double> f23(&F.F[(std::size_t(L) * 6 + F23) * n], n);
                std::span<const double> f13(&F.F[(std::size_t(L) * 6 + F13) * n], n);
                std::span<const double> f12(&F.F[(std::size_t(L) * 6 + F12) * n], n);
                double v = central_diff(f23, lat, 0, x, 2) - central_diff(f13, lat, 1, x, 2) +
                           central_diff(f12, lat, 2, x, 2);
                worst = std::max(worst, std::abs(v));
            }
            r[x] = worst;
        }
    });
    return deterministic_max(r);
}

double bianchi_residual(const FieldState& s, const Lattice& lat) { return bianchi_residual(field_strength(s, lat), lat); }

namespace {

template <class T>
void put(std::ostream& os, T v) {
    if constexpr (std::endian::native == std::endian::big) {
        char buf[sizeof(T)];
        std::memcpy(buf, &v, sizeof(T));
        std::reverse(buf, buf + sizeof(T));
        os.write(buf, sizeof(T));
    } else {
        os.write(reinterpret_cast<const char*>(&v), sizeof(T));
    }
}

template <class T>
T get(std::istream& is) {
    char buf[sizeof(T)];
    if (!is.read(buf, sizeof(T))) throw IoError("truncated snapshot");
    if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
    T v;
    std::memcpy(&v, buf, sizeof(T));
    return v;
}

constexpr std::uint32_t kSnapshotVersion = 1;

}  // namespace

void write_snapshot(const std::filesystem::path& path, const FieldState& s, const LatticeSpec& spec) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError(fmt::format("cannot open {} for writing", path.string()));
    os.write("MKG1", 4);
    put<std::uint32_t>(os, kSnapshotVersion);
    for (int d = 0; d < 3; ++d) put<std::uint32_t>(os, std::uint32_t(spec.dims[d]));
    put<std::uint32_t>(os, std::uint32_t(s.n_gauge));
    put<std::uint32_t>(os, std::uint32_t(s.n_scalar));
    put<double>(os, spec.dx);
    put<double>(os, s.t);
    for (double v : s.A) put(os, v);
    for (double v : s.E) put(os, v);
    for (cplx v : s.phi) {
        put(os, v.real());
        put(os, v.imag());
    }
    for (cplx v : s.pi) {
        put(os, v.real());
        put(os, v.imag());
    }
    if (!os) throw IoError(fmt::format("write failed for {}", path.string()));
}

FieldState read_snapshot(const std::filesystem::path& path, LatticeSpec* spec) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError(fmt::format("cannot open {}", path.string()));
    char magic[4];
    if (!is.read(magic, 4) || std::memcmp(magic, "MKG1", 4) != 0)
        throw IoError(fmt::format("{} is not an MKG1 snapshot", path.string()));
    auto version = get<std::uint32_t>(is);
    if (version != kSnapshotVersion) throw IoError(fmt::format("unsupported snapshot version {}", version));
    LatticeSpec ls;
    for (int d = 0; d < 3; ++d) ls.dims[d] = int(get<std::uint32_t>(is));
    int nv = int(get<std::uint32_t>(is));
    int nc = int(get<std::uint32_t>(is));
    ls.dx = get<double>(is);
    FieldState s(nv, nc, ls.sites());
    s.t = get<double>(is);
    for (double& v : s.A) v = get<double>(is);
    for (double& v : s.E) v = get<double>(is);
    for (cplx& v : s.phi) {
        double re = get<double>(is);
        v = {re, get<double>(is)};
    }
    for (cplx& v : s.pi) {
        double re = get<double>(is);
        v = {re, get<double>(is)};
    }
    if (spec) *spec = ls;
    return s;
}

}  // namespace mkg
