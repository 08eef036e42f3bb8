#include "mkg/model.hpp"

#include <fmt/format.h>

#include "mkg/errors.hpp"

namespace mkg {

ModelSpec ModelSpec::free(int n_gauge, int n_scalar) {
    ModelSpec m;
    m.n_gauge = n_gauge;
    m.n_scalar = n_scalar;
    m.charges.assign(n_gauge, 0.0);
    m.couplings = CouplingFamily::identity(n_gauge);
    return m;
}

void ModelSpec::validate() const {
    if (n_gauge < 1 || n_gauge > kMaxComponents)
        throw InvalidFamily(fmt::format("n_gauge must lie in [1, {}]", kMaxComponents));
    if (n_scalar < 1 || n_scalar > kMaxComponents)
        throw InvalidFamily(fmt::format("n_scalar must lie in [1, {}]", kMaxComponents));
    if (int(charges.size()) != n_gauge)
        throw InvalidFamily(fmt::format("expected {} charges, got {}", n_gauge, charges.size()));
    if (couplings.n_gauge != n_gauge)
        throw InvalidFamily("coupling family size does not match n_gauge");
    couplings.validate();
    kahler.validate();
    potential.validate();
}

}  // namespace mkg
