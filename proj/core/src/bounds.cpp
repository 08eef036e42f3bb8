#include "mkg/bounds.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "mkg/errors.hpp"

namespace mkg {

void EstimateConstants::validate() const {
    for (double v : b)
        if (v < 0.0) throw ValidationError("estimates.b", "coefficients must be nonnegative");
    if (C1 < 0.0 || C2 < 0.0 || C3 < 0.0) throw ValidationError("estimates.C", "constants must be nonnegative");
    if (c4 < 0.0) throw ValidationError("estimates.c4", "must be nonnegative");
    if (N < 1) throw ValidationError("estimates.N", "must be at least 1");
    if (J0 < 0.0) throw ValidationError("estimates.J0", "must be nonnegative");
}

namespace {

double ipow(double x, int k) {
    double r = 1.0;
    for (int i = 0; i < k; ++i) r *= x;
    return r;
}

// Σ_{n=lo}^{hi} w(n) x^{n+k}
template <class Weight>
double power_sum(double x, int lo, int hi, int k, Weight w) {
    double s = 0.0;
    for (int n = lo; n <= hi; ++n) s += w(n) * ipow(x, n + k);
    return s;
}

double power_sum(double x, int lo, int hi, int k) {
    return power_sum(x, lo, hi, k, [](int) { return 1.0; });
}

bool polynomial_branch(const EstimateConstants& c) { return c.potential_kind == PotentialKind::Polynomial; }

double bracket_Z(double p, int N) { return p + ipow(p, 3) + power_sum(p, 1, N, 2) + power_sum(p, 1, N, 4); }

}  // namespace

double eval_O(const NormSnapshot& s, const EstimateConstants& c) {
    double p = s.linf_phi;
    double odd = 0.0;
    for (int n = 1; n <= c.N - 2; ++n) odd += ipow(p, 2 * n + 1);
    return p * s.linf_dphi * (1.0 + c.J0 * (1.0 + s.t) * odd);
}

double eval_I(const NormSnapshot& s, const EstimateConstants& c) {
    if (polynomial_branch(c)) return eval_O(s, c);
    return s.linf_phi * s.linf_dphi * c.J0;
}

double eval_D_func(const NormSnapshot& s, const EstimateConstants& c) {
    double p = s.linf_phi;
    double a = 0.0, b = 0.0;
    for (int n = 0; n <= c.N - 1; ++n) a += ipow(p, 2 * n);
    for (int n = 0; n <= c.N - 2; ++n) b += ipow(p, 2 * n);
    return a + c.J0 * (1.0 + s.t) * s.linf_dPsi * b;
}

double eval_H_func(const NormSnapshot& s, const EstimateConstants& c) {
    if (polynomial_branch(c)) return eval_D_func(s, c);
    return c.J0 * (s.linf_dPsi * s.linf_dPsi + 1.0);
}

LMN eval_LMN(const NormSnapshot& s, const EstimateConstants& c) {
    double p = s.linf_phi, d = s.linf_dphi, P = s.linf_dPsi;
    int N = c.N;
    double I = eval_I(s, c);
    double Zb = bracket_Z(p, N);
    double tail = power_sum(p, 1, N, 5) + power_sum(p, 1, N, 4) + power_sum(p, 1, N, 3) + power_sum(p, 1, N, 2);
    LMN r;
    r.L = p * Zb * (d + 1.0) + P * p + d + p * p * d + p * I;
    r.M = p * P + p * p + power_sum(p, 1, N, 3, [&](int n) { return (n + 2.0) / (n + 1.0) * c.bn(n); }) +
          c.C1 * p * p + p * p + p + tail + 1.0;
    r.N = tail + p * p + p + 1.0 + Zb * (d + 1.0) + p * d + c.c4 * I;
    return r;
}

SXUW eval_SXUW(const NormSnapshot& s, const EstimateConstants& c) {
    double p = s.linf_phi, d = s.linf_dphi;
    int N = c.N;
    double I = eval_I(s, c);
    double Zb = bracket_Z(p, N);
    SXUW r;
    r.S = d * (power_sum(p, 1, N, 2) + power_sum(p, 1, N, 1) + 1.0) + I + p + (1.0 + s.t) * s.linf_A +
          d * Zb * (1.0 + p);
    r.X = 1.0 + d * d * p * p + d * p * p + p + d + p * p;
    r.U = Zb * (1.0 + p) + p * d + c.c4 * I;
    r.W = (Zb * (1.0 + d) + p * d + c.c4 * I) * Zb + eval_H_func(s, c);
    return r;
}

SectionFive eval_YZP(const NormSnapshot& s, const EstimateConstants& c, double E0_sf) {
    if (E0_sf < 0.0) throw InvalidFamily("E0_sf must be nonnegative");
    double p = s.linf_phi, d = s.linf_dphi, D = s.linf_Dphi, F = s.linf_F, A = s.linf_A, P = s.linf_dPsi;
    double e = std::sqrt(E0_sf);
    double Psi = p * p;
    int N = c.N;
    double I = eval_I(s, c);
    auto bw = [&](int n) { return c.bn(n); };
    auto ratio = [&](int n) { return (n + 2.0) / (n + 1.0) * c.bn(n); };

    SectionFive r;
    r.Y = 8.0 * power_sum(p, 1, N, 6, bw) + power_sum(p, 1, N, 5, bw) + 12.0 * power_sum(p, 1, N, 3, bw) +
          6.0 * c.C1 * (p * p + p * p * p) + (c.C2 + c.C3) * p + c.C3;
    r.Z = bracket_Z(p, N);
    r.Pcal = r.Y * (D + 1.0 + p) + F * d * (1.0 + p) + (d + D) * r.Z + I + 1.0;
    r.Ztilde = power_sum(p, 1, N, 2, ratio) + c.C1 * p;
    r.Zhat = power_sum(p, 0, N, 1, ratio) + power_sum(p, 0, N, 2, [&](int n) { return (n + 3.0) * c.bn(n); }) + c.C1;

    if (polynomial_branch(c)) {
        double a = 0.0, b = 0.0;
        for (int n = 2; n <= N; ++n) a += (n - 1.0) * ipow(Psi, n - 2);
        for (int n = 1; n <= N; ++n) b += n * ipow(Psi, n - 1);
        r.Zcal = p * a * e + b;
        r.chi = e * b;
    } else {
        r.Zcal = 1.0 + e * p;
        r.chi = e;
    }

    double Y = r.Y, Z = r.Z, Zt = r.Ztilde, Zh = r.Zhat;
    r.X = Y * ((D * d + D + p + d + 1.0) * e + 1.0) + e * F * (d * d * p + d) + p;
    r.W = D * Y * (d * e + p + P * e * d) + F * p * d * (d * e + p * e + P * e * d) + D * P * Zt * e +
          D * p * (Zh * d * e + Zt) + d * Y * (p + e * p * p + e * d * p + D * e) +
          F * d * d * p * p * p * (d * d + p) * e + d * d * p * p;
    r.S = d * Zt * (p * F * e + r.chi) + e * d * Zt * Zt * (1.0 + p) * (D + d) + e * Z * (D + 1.0) * (d + p) +
          e * F * d + D * p * p * d * e * (1.0 + p) + Zh * d * (1.0 + p) * E0_sf;
    r.T = e * (1.0 + p) * Zt + F * p + Z * (D + 1.0);
    r.P = p * p * d * d + Zt * D * d * p + F * d * p * p + F * d + p * r.T + Y * (r.T + p + A + 1.0) + p * r.S +
          p * r.Zcal + Y * r.S + e * Y * (d + p) + Y * r.Zcal + p * p * d * d * d * F * e + D * d * p * e * Y +
          Zt * d * p * D * (e + e * (p * d + p * p)) + F * (P * d * d * e * p + d * d * p * e) +
          F * (P * (d * e + p) + P * P * d * e);
    r.U = r.S + r.T + r.Zcal;
    return r;
}

std::map<std::string, double> all_functionals(const NormSnapshot& s, const EstimateConstants& c, double E0_sf) {
    LMN lmn = eval_LMN(s, c);
    SXUW sx = eval_SXUW(s, c);
    SectionFive f = eval_YZP(s, c, E0_sf);
    return {{"I", eval_I(s, c)},  {"O", eval_O(s, c)},  {"H", eval_H_func(s, c)}, {"D", eval_D_func(s, c)},
            {"L", lmn.L},         {"M", lmn.M},         {"N", lmn.N},            {"S_cal", sx.S},
            {"X_cal", sx.X},      {"U_cal", sx.U},      {"W_cal", sx.W},         {"Y", f.Y},
            {"Z", f.Z},           {"P_cal", f.Pcal},    {"X", f.X},              {"W", f.W},
            {"P", f.P},           {"U", f.U},           {"Z_tilde", f.Ztilde},   {"Z_hat", f.Zhat},
            {"S", f.S},           {"T", f.T},           {"Z_cal", f.Zcal},       {"chi", f.chi}};
}

}  // namespace mkg
