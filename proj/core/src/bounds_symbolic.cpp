#include <cmath>

#include "mkg/bounds.hpp"

namespace mkg {

namespace {

using Powers = std::array<int, kVarCount>;

class Poly {
public:
    Poly() = default;
    static Poly constant(double c) {
        Poly p;
        if (c != 0.0) p.terms_[Powers{}] = c;
        return p;
    }
    static Poly var(BoundVar v, int k = 1) {
        Poly p;
        Powers e{};
        e[v] = k;
        p.terms_[e] = 1.0;
        return p;
    }

    Poly operator+(const Poly& o) const {
        Poly r = *this;
        for (auto& [e, c] : o.terms_) r.terms_[e] += c;
        return r;
    }
    Poly operator*(const Poly& o) const {
        Poly r;
        for (auto& [e1, c1] : terms_)
            for (auto& [e2, c2] : o.terms_) {
                Powers e;
                for (int k = 0; k < kVarCount; ++k) e[k] = e1[k] + e2[k];
                r.terms_[e] += c1 * c2;
            }
        return r;
    }
    Poly& operator+=(const Poly& o) { return *this = *this + o; }

    MonomialList list() const {
        MonomialList out;
        for (auto& [e, c] : terms_)
            if (c != 0.0) out.push_back({c, e});
        return out;
    }

private:
    std::map<Powers, double> terms_;
};

Poly operator*(double c, const Poly& p) { return Poly::constant(c) * p; }

Poly phi_pow(int k) { return Poly::var(kVarPhi, k); }

Poly sum_phi(int lo, int hi, int offset, auto weight) {
    Poly r;
    for (int n = lo; n <= hi; ++n) r += weight(n) * phi_pow(n + offset);
    return r;
}

Poly sum_phi(int lo, int hi, int offset) {
    return sum_phi(lo, hi, offset, [](int) { return 1.0; });
}

}  // namespace

std::array<double, kVarCount> bound_variables(const NormSnapshot& s, double E0_sf) {
    std::array<double, kVarCount> v{};
    v[kVarPhi] = s.linf_phi;
    v[kVarDphi] = s.linf_dphi;
    v[kVarCovD] = s.linf_Dphi;
    v[kVarF] = s.linf_F;
    v[kVarA] = s.linf_A;
    v[kVarDPsi] = s.linf_dPsi;
    v[kVarE] = std::sqrt(E0_sf);
    v[kVarT] = s.t;
    return v;
}

double evaluate(const MonomialList& m, const std::array<double, kVarCount>& vars) {
    double total = 0.0;
    for (const Monomial& t : m) {
        double term = t.coef;
        for (int k = 0; k < kVarCount; ++k)
            for (int q = 0; q < t.powers[k]; ++q) term *= vars[k];
        total += term;
    }
    return total;
}

std::map<std::string, MonomialList> monomial_lists(const EstimateConstants& c) {
    const int N = c.N;
    const bool poly_branch = c.potential_kind == PotentialKind::Polynomial;
    Poly one = Poly::constant(1.0);
    Poly p = Poly::var(kVarPhi), d = Poly::var(kVarDphi), D = Poly::var(kVarCovD), F = Poly::var(kVarF);
    Poly A = Poly::var(kVarA), P = Poly::var(kVarDPsi), e = Poly::var(kVarE), t = Poly::var(kVarT);
    Poly J0 = Poly::constant(c.J0);
    Poly one_t = one + t;

    Poly odd;
    for (int n = 1; n <= N - 2; ++n) odd += phi_pow(2 * n + 1);
    Poly O = p * d * (one + J0 * one_t * odd);
    Poly I = poly_branch ? O : p * d * J0;

    Poly even_a, even_b;
    for (int n = 0; n <= N - 1; ++n) even_a += phi_pow(2 * n);
    for (int n = 0; n <= N - 2; ++n) even_b += phi_pow(2 * n);
    Poly Dfun = even_a + J0 * one_t * P * even_b;
    Poly H = poly_branch ? Dfun : J0 * (P * P + one);

    Poly Zb = p + phi_pow(3) + sum_phi(1, N, 2) + sum_phi(1, N, 4);
    Poly tail = sum_phi(1, N, 5) + sum_phi(1, N, 4) + sum_phi(1, N, 3) + sum_phi(1, N, 2);
    auto ratio = [&](int n) { return (n + 2.0) / (n + 1.0) * c.bn(n); };
    auto bw = [&](int n) { return c.bn(n); };

    Poly L = p * Zb * (d + one) + P * p + d + p * p * d + p * I;
    Poly M = p * P + p * p + sum_phi(1, N, 3, ratio) + c.C1 * (p * p) + p * p + p + tail + one;
    Poly Nf = tail + p * p + p + one + Zb * (d + one) + p * d + c.c4 * I;

    Poly S_cal = d * (sum_phi(1, N, 2) + sum_phi(1, N, 1) + one) + I + p + one_t * A + d * Zb * (one + p);
    Poly X_cal = one + d * d * p * p + d * p * p + p + d + p * p;
    Poly U_cal = Zb * (one + p) + p * d + c.c4 * I;
    Poly W_cal = (Zb * (one + d) + p * d + c.c4 * I) * Zb + H;

    Poly Y = 8.0 * sum_phi(1, N, 6, bw) + sum_phi(1, N, 5, bw) + 12.0 * sum_phi(1, N, 3, bw) +
             (6.0 * c.C1) * (p * p + phi_pow(3)) + (c.C2 + c.C3) * p + Poly::constant(c.C3);
    Poly Z = Zb;
    Poly Pcal = Y * (D + one + p) + F * d * (one + p) + (d + D) * Z + I + one;
    Poly Zt = sum_phi(1, N, 2, ratio) + c.C1 * p;
    Poly Zh = sum_phi(0, N, 1, ratio) + sum_phi(0, N, 2, [&](int n) { return (n + 3.0) * c.bn(n); }) +
              Poly::constant(c.C1);

    Poly Zcal, chi;
    if (poly_branch) {
        Poly a, b;
        for (int n = 2; n <= N; ++n) a += (n - 1.0) * phi_pow(2 * (n - 2));
        for (int n = 1; n <= N; ++n) b += double(n) * phi_pow(2 * (n - 1));
        Zcal = p * a * e + b;
        chi = e * b;
    } else {
        Zcal = one + e * p;
        chi = e;
    }

    Poly X = Y * ((D * d + D + p + d + one) * e + one) + e * F * (d * d * p + d) + p;
    Poly W = D * Y * (d * e + p + P * e * d) + F * p * d * (d * e + p * e + P * e * d) + D * P * Zt * e +
             D * p * (Zh * d * e + Zt) + d * Y * (p + e * p * p + e * d * p + D * e) +
             F * d * d * phi_pow(3) * (d * d + p) * e + d * d * p * p;
    Poly S = d * Zt * (p * F * e + chi) + e * d * Zt * Zt * (one + p) * (D + d) + e * Z * (D + one) * (d + p) +
             e * F * d + D * p * p * d * e * (one + p) + Zh * d * (one + p) * e * e;
    Poly T = e * (one + p) * Zt + F * p + Z * (D + one);
    Poly Pf = p * p * d * d + Zt * D * d * p + F * d * p * p + F * d + p * T + Y * (T + p + A + one) + p * S +
              p * Zcal + Y * S + e * Y * (d + p) + Y * Zcal + p * p * d * d * d * F * e + D * d * p * e * Y +
              Zt * d * p * D * (e + e * (p * d + p * p)) + F * (P * d * d * e * p + d * d * p * e) +
              F * (P * (d * e + p) + P * P * d * e);
    Poly U = S + T + Zcal;

    return {{"I", I.list()},         {"O", O.list()},         {"H", H.list()},         {"D", Dfun.list()},
            {"L", L.list()},         {"M", M.list()},         {"N", Nf.list()},        {"S_cal", S_cal.list()},
            {"X_cal", X_cal.list()}, {"U_cal", U_cal.list()}, {"W_cal", W_cal.list()}, {"Y", Y.list()},
            {"Z", Z.list()},         {"P_cal", Pcal.list()},  {"X", X.list()},         {"W", W.list()},
            {"P", Pf.list()},        {"U", U.list()},         {"Z_tilde", Zt.list()},  {"Z_hat", Zh.list()},
            {"S", S.list()},         {"T", T.list()},         {"Z_cal", Zcal.list()},  {"chi", chi.list()}};
}

}  // namespace mkg
