#pragma once

#include <array>

#include "mkg/dynamics.hpp"
#include "mkg/lattice.hpp"

namespace mkg {

struct DiagnosticsRecord {
    double t = 0.0;
    double energy_E0 = 0.0;
    double flat_J = 0.0;
    double sobolev_E0 = 0.0;
    double sobolev_E1 = 0.0;
    double gauss_res_l2 = 0.0;
    double gauss_res_linf = 0.0;
    double bianchi_res_linf = 0.0;
    NormSnapshot norm_snapshot;
    double mass_m = 1.0;
};

using StressTensor = std::array<std::array<double, 4>, 4>;

// Contravariant T^{μν} at one site from site-centred F, covariant central D_μφ and g(φ).
StressTensor stress_energy(const FieldState& s, const Lattice& lat, const ModelSpec& model, std::size_t site);

double energy_E0(const FieldState& s, const Lattice& lat, const ModelSpec& model);
// Same integrand with the metric expanded through Φ', Φ'' directly.
double energy_E0_phi_form(const FieldState& s, const Lattice& lat, const ModelSpec& model);

double flat_energy_J(const NormSnapshot& snap, double c1);

struct SobolevEnergies {
    double E0 = 0.0;
    double E1 = 0.0;
};

SobolevEnergies sobolev_energies(const FieldState& s, const Lattice& lat, double m);

DiagnosticsRecord diagnose(const FieldState& s, const Lattice& lat, const ModelSpec& model, double m, double c1);

}  // namespace mkg
