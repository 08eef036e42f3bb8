#pragma once

#include <vector>

#include "mkg/lattice.hpp"
#include "mkg/model.hpp"

namespace mkg {

struct StateDerivative {
    std::vector<double> dA;
    std::vector<double> dE;
    std::vector<cplx> dphi;
    std::vector<cplx> dpi;
};

// Equations of motion of the discrete Lagrangian: Yee links for the gauge fields,
// compact link variables for the covariant derivative, averaged couplings.
StateDerivative eom_rhs(const FieldState& s, const Lattice& lat, const ModelSpec& model);

FieldState step_rk4(const FieldState& s, const Lattice& lat, const ModelSpec& model, double dt, long long step = 0);

struct GaussResidual {
    std::vector<double> field;  // [L][x]
    double l2 = 0.0;
    double linf = 0.0;
};

GaussResidual gauss_residual(const FieldState& s, const Lattice& lat, const ModelSpec& model);

// theta indexed [L][x]; A_i → A_i + Δ⁺_iθ, φ → exp(iΣ q θ) φ, π likewise.
FieldState gauge_transform(const FieldState& s, const Lattice& lat, const ModelSpec& model,
                           const std::vector<double>& theta);

// Discrete Lagrangian and Hamiltonian summed over the lattice (times the cell volume).
double lagrangian(const FieldState& s, const Lattice& lat, const ModelSpec& model);
double hamiltonian(const FieldState& s, const Lattice& lat, const ModelSpec& model);

// Throws RadiusExceeded naming the first site beyond the Kähler validity radius.
void check_radius(const FieldState& s, const ModelSpec& model);

}  // namespace mkg
