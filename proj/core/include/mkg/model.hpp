#pragma once

#include <vector>

#include "mkg/couplings.hpp"
#include "mkg/kahler.hpp"
#include "mkg/potential.hpp"

namespace mkg {

struct ModelSpec {
    int n_gauge = 1;
    int n_scalar = 1;
    // One charge per gauge index, shared by every scalar component.
    std::vector<double> charges{0.0};
    CouplingFamily couplings = CouplingFamily::identity(1);
    KahlerFamily kahler = KahlerFamily::flat();
    PotentialFamily potential = PotentialFamily::zero();

    static ModelSpec free(int n_gauge, int n_scalar);
    void validate() const;
};

}  // namespace mkg
