#pragma once

#include "mkg/types.hpp"

namespace mkg {

enum class CouplingKind { Constant, Saturating };

// h(Ψ) = h_base + amplitude·tanh(Ψ)·h_mod, and likewise for k.
struct CouplingFamily {
    int n_gauge = 1;
    CouplingKind h_kind = CouplingKind::Constant;
    SmallMat h_base;
    SmallMat h_mod;
    double h_amplitude = 0.0;
    CouplingKind k_kind = CouplingKind::Constant;
    SmallMat k_base;
    SmallMat k_mod;
    double k_amplitude = 0.0;

    static CouplingFamily identity(int n);
    void validate() const;
};

struct ShapeValues {
    double s0;
    double s1;
    double s2;
};

ShapeValues saturating_shape(double psi);

SmallMat eval_h(const CouplingFamily& f, double psi);
SmallMat eval_h_inverse(const CouplingFamily& f, double psi);
SmallMat eval_h_prime(const CouplingFamily& f, double psi);
SmallMat eval_h_second(const CouplingFamily& f, double psi);
SmallMat eval_k(const CouplingFamily& f, double psi);
SmallMat eval_k_prime(const CouplingFamily& f, double psi);
SmallMat eval_k_second(const CouplingFamily& f, double psi);

// h, h', k, k' at one Ψ written row-major into n_gauge² arrays; same values as the matrix evaluators.
void eval_coupling_arrays(const CouplingFamily& f, double psi, double* h, double* hp, double* k, double* kp);

}  // namespace mkg
