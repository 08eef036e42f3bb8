#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mkg/types.hpp"

namespace mkg {

enum class PotentialKind { Polynomial, SineGordon, Toda };

struct PotentialFamily {
    PotentialKind kind = PotentialKind::Polynomial;
    // V = Σ a_n Ψ^n; a_1 is the squared-mass coefficient.
    std::vector<double> coefficients;
    double v0 = 0.0;
    double lambda = 0.0;
    // (ã_n, λ̃_n) with V = Σ ã_n exp(-λ̃_n Ψ).
    std::vector<std::pair<double, double>> toda;
    double psi_max = 100.0;

    static PotentialFamily zero();
    static PotentialFamily polynomial(std::vector<double> a);
    static PotentialFamily sine_gordon(double v0, double lambda);
    static PotentialFamily toda_sum(std::vector<std::pair<double, double>> pairs);

    // Throws on invalid exponents or a failed positivity scan; a Toda family with
    // negative coefficients only reports a warning through the return value.
    std::vector<std::string> validate() const;
};

double eval_V(const PotentialFamily& f, double psi);
double eval_V_prime(const PotentialFamily& f, double psi);
double eval_V_second(const PotentialFamily& f, double psi);
std::vector<cplx> grad_V(const PotentialFamily& f, std::span<const cplx> phi);

}  // namespace mkg
