#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "mkg/model.hpp"
#include "mkg/types.hpp"

namespace mkg {

struct LatticeSpec {
    std::array<int, 3> dims{1, 1, 1};
    double dx = 1.0;
    // Order of the plain central differences used by norms and Sobolev energies.
    int stencil_order = 2;

    std::size_t sites() const { return std::size_t(dims[0]) * dims[1] * dims[2]; }
    // Directions with a single site are treated as translation invariant: integrals are per unit length there.
    double cell_volume() const {
        double v = 1.0;
        for (int d : dims)
            if (d > 1) v *= dx;
        return v;
    }
    void validate() const;
};

// Periodic lattice with precomputed neighbour tables. Sites are ordered x-fastest.
class Lattice {
public:
    explicit Lattice(const LatticeSpec& spec);

    const LatticeSpec& spec() const { return spec_; }
    std::size_t sites() const { return n_; }
    double dx() const { return spec_.dx; }
    int dim(int d) const { return spec_.dims[d]; }
    std::size_t fwd(int d, std::size_t x) const { return fwd_[d][x]; }
    std::size_t bwd(int d, std::size_t x) const { return bwd_[d][x]; }
    std::size_t index(int ix, int iy, int iz) const;
    std::array<int, 3> coords(std::size_t x) const;
    std::array<double, 3> position(std::size_t x) const;

private:
    LatticeSpec spec_;
    std::size_t n_;
    std::array<std::vector<std::uint32_t>, 3> fwd_;
    std::array<std::vector<std::uint32_t>, 3> bwd_;
};

// A_i and E_i live on the link (x, x+î) and are stored at x; φ and π live on sites.
struct FieldState {
    int n_gauge = 0;
    int n_scalar = 0;
    std::size_t sites = 0;
    std::vector<double> A;
    std::vector<double> E;
    std::vector<cplx> phi;
    std::vector<cplx> pi;
    double t = 0.0;

    FieldState() = default;
    FieldState(int n_gauge, int n_scalar, std::size_t sites);

    std::size_t gidx(int L, int i, std::size_t x) const { return (std::size_t(L) * 3 + i) * sites + x; }
    std::size_t sidx(int a, std::size_t x) const { return std::size_t(a) * sites + x; }
};

enum FieldComponent { F01 = 0, F02, F03, F12, F13, F23 };

struct FieldStrength {
    int n_gauge = 0;
    std::size_t sites = 0;
    std::vector<double> F;

    FieldStrength() = default;
    FieldStrength(int n_gauge, std::size_t sites);

    double& operator()(int L, int c, std::size_t x) { return F[(std::size_t(L) * 6 + c) * sites + x]; }
    double operator()(int L, int c, std::size_t x) const { return F[(std::size_t(L) * 6 + c) * sites + x]; }
};

struct NormSnapshot {
    double t = 0.0;
    double linf_phi = 0.0;
    double linf_dphi = 0.0;
    double linf_Dphi = 0.0;
    double linf_F = 0.0;
    double linf_A = 0.0;
    double linf_dPsi = 0.0;
    double l2_E = 0.0;
    double l2_H = 0.0;
    double l2_Dphi = 0.0;
    double l2_phi = 0.0;
    double l2_V = 0.0;
};

// Site-centred F: F_0i = -Ē_i and F_ij is the mean of the four plaquettes touching x.
FieldStrength field_strength(const FieldState& s, const Lattice& lat);
FieldStrength hodge_dual(const FieldStrength& F);

// Magnetic field per plaquette, B_n(x) with n the plaquette normal, stored [L][n][x].
std::vector<double> plaquette_field(const std::vector<double>& A, int n_gauge, const Lattice& lat);

cplx link_variable(const FieldState& s, std::span<const double> charges, int i, std::size_t x, double dx);

// Gauge-covariant central difference; result indexed [a][mu][x] with D_0 = π.
std::vector<cplx> covariant_derivative(const FieldState& s, const Lattice& lat, std::span<const double> charges);

// Plain central difference of a site array along direction d with the lattice stencil order.
double central_diff(std::span<const double> f, const Lattice& lat, int d, std::size_t x, int order);
cplx central_diff(std::span<const cplx> f, const Lattice& lat, int d, std::size_t x, int order);

NormSnapshot norms(const FieldState& s, const Lattice& lat, const ModelSpec& model);

// L∞ over sites and spatial triples of the cyclic sum of central differences of F.
double bianchi_residual(const FieldStrength& F, const Lattice& lat);
double bianchi_residual(const FieldState& s, const Lattice& lat);

void write_snapshot(const std::filesystem::path& path, const FieldState& s, const LatticeSpec& spec);
FieldState read_snapshot(const std::filesystem::path& path, LatticeSpec* spec = nullptr);

}  // namespace mkg
