#pragma once

#include <cmath>
#include <numbers>
#include <random>

#include "mkg/dynamics.hpp"
#include "mkg/lattice.hpp"
#include "mkg/model.hpp"

namespace mkg::test {

inline ModelSpec interacting_model(int nv, int nc) {
    ModelSpec m = ModelSpec::free(nv, nc);
    m.charges.resize(nv);
    for (int L = 0; L < nv; ++L) m.charges[L] = 0.7 - 0.4 * L;
    CouplingFamily& c = m.couplings;
    c.h_kind = CouplingKind::Saturating;
    c.h_base = SmallMat::Identity(nv, nv) * 1.2;
    c.h_mod = SmallMat::Identity(nv, nv);
    if (nv > 1) c.h_mod(0, 1) = c.h_mod(1, 0) = 0.3;
    c.h_amplitude = 0.25;
    c.k_kind = CouplingKind::Saturating;
    c.k_base = SmallMat::Identity(nv, nv) * 0.15;
    c.k_mod = SmallMat::Constant(nv, nv, 0.2);
    c.k_amplitude = 0.5;
    m.kahler = KahlerFamily::polynomial({0.0, 0.0, 1.0, 0.0, 0.05});
    m.potential = PotentialFamily::polynomial({0.0, 0.5, 0.1});
    return m;
}

// Sum of a few low Fourier modes with random amplitudes and phases.
class SmoothRandom {
public:
    SmoothRandom(const Lattice& lat, unsigned seed) : lat_(lat), rng_(seed) {}

    double sample(std::size_t x, double amp) {
        if (modes_.empty()) draw();
        auto c = lat_.coords(x);
        double v = 0.0;
        for (const Mode& m : modes_) {
            double arg = m.phase;
            for (int d = 0; d < 3; ++d) arg += 2.0 * std::numbers::pi * m.k[d] * c[d] / lat_.dim(d);
            v += m.a * std::cos(arg);
        }
        return amp * v;
    }

    void next() { modes_.clear(); }

private:
    struct Mode {
        int k[3];
        double a;
        double phase;
    };

    void draw() {
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        for (int j = 0; j < 3; ++j) {
            Mode m{};
            for (int d = 0; d < 3; ++d) m.k[d] = lat_.dim(d) > 1 ? int(std::floor(1.5 * (u(rng_) + 1.0))) : 0;
            m.a = u(rng_) / 3.0;
            m.phase = std::numbers::pi * u(rng_);
            modes_.push_back(m);
        }
    }

    const Lattice& lat_;
    std::mt19937 rng_;
    std::vector<Mode> modes_;
};

inline FieldState smooth_state(const Lattice& lat, const ModelSpec& model, unsigned seed, double amp) {
    FieldState s(model.n_gauge, model.n_scalar, lat.sites());
    SmoothRandom r(lat, seed);
    auto fill_real = [&](std::vector<double>& v) {
        for (std::size_t blk = 0; blk < v.size() / lat.sites(); ++blk) {
            r.next();
            for (std::size_t x = 0; x < lat.sites(); ++x) v[blk * lat.sites() + x] = r.sample(x, amp);
        }
    };
    auto fill_cplx = [&](std::vector<cplx>& v) {
        for (std::size_t blk = 0; blk < v.size() / lat.sites(); ++blk) {
            r.next();
            std::vector<double> re(lat.sites());
            for (std::size_t x = 0; x < lat.sites(); ++x) re[x] = r.sample(x, amp);
            r.next();
            for (std::size_t x = 0; x < lat.sites(); ++x) v[blk * lat.sites() + x] = {re[x], r.sample(x, amp)};
        }
    };
    fill_real(s.A);
    fill_real(s.E);
    fill_cplx(s.phi);
    fill_cplx(s.pi);
    return s;
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

inline double max_abs_diff(const std::vector<cplx>& a, const std::vector<cplx>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace mkg::test
