#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "mkg/bounds.hpp"
#include "mkg/errors.hpp"

namespace mkg {

namespace {

std::vector<double> time_derivative(const std::vector<double>& y, double h) {
    std::size_t n = y.size();
    std::vector<double> d(n);
    d[0] = (-3.0 * y[0] + 4.0 * y[1] - y[2]) / (2.0 * h);
    d[n - 1] = (3.0 * y[n - 1] - 4.0 * y[n - 2] + y[n - 3]) / (2.0 * h);
    for (std::size_t k = 1; k + 1 < n; ++k) d[k] = (y[k + 1] - y[k - 1]) / (2.0 * h);
    return d;
}

// Supremum of the ratios over the whole trace, its first half and its final quarter; 0/0 is skipped.
FitSummary supremum_fit(const std::string& name, const std::vector<double>& num, const std::vector<double>& den) {
    FitSummary f;
    f.name = name;
    std::size_t n = num.size();
    std::size_t half = (n + 1) / 2;
    std::size_t quarter = (3 * n) / 4;
    bool any = false;
    for (std::size_t k = 0; k < n; ++k) {
        if (!(den[k] > 0.0)) continue;
        double r = num[k] / den[k];
        if (!std::isfinite(r)) {
            f.finite = false;
            continue;
        }
        any = true;
        f.full_max = std::max(f.full_max, r);
        if (k < half) f.half_max = std::max(f.half_max, r);
        if (k >= quarter) f.final_quarter_max = std::max(f.final_quarter_max, r);
    }
    f.indeterminate = !any;
    f.value = f.full_max;
    f.stabilized = f.finite && f.final_quarter_max <= 1.05 * f.half_max;
    return f;
}

// Smallest a + b t with a = y(0) that bounds y on the trace.
std::pair<double, double> linear_envelope(const std::vector<double>& t, const std::vector<double>& y) {
    double a = y[0], b = 0.0;
    for (std::size_t k = 1; k < y.size(); ++k)
        if (t[k] > t[0]) b = std::max(b, (y[k] - a) / (t[k] - t[0]));
    return {a, b};
}

}  // namespace

GronwallReport audit_gronwall(const std::vector<DiagnosticsRecord>& trace, const EstimateConstants& c) {
    if (trace.size() < 3) throw TraceTooShort(fmt::format("trace has {} records, need at least 3", trace.size()));
    std::size_t n = trace.size();
    double h = trace[1].t - trace[0].t;
    if (!(h > 0.0)) throw NonUniformSampling("trace times must increase");
    for (std::size_t k = 1; k < n; ++k) {
        double dk = trace[k].t - trace[k - 1].t;
        if (std::abs(dk - h) > 1e-9 * std::max(1.0, std::abs(h)))
            throw NonUniformSampling(fmt::format("spacing {} at record {} differs from {}", dk, k, h));
    }

    GronwallReport rep;
    std::vector<double> t(n), J(n), E0(n), E1(n), envelope(n), Pcal(n), expo(n), F(n), Dp(n);
    double J0 = trace[0].flat_J;
    EstimateConstants cc = c;
    cc.J0 = J0;
    for (std::size_t k = 0; k < n; ++k) {
        const DiagnosticsRecord& r = trace[k];
        t[k] = r.t;
        J[k] = r.flat_J;
        E0[k] = r.sobolev_E0;
        E1[k] = r.sobolev_E1;
        envelope[k] = J0 * (1.0 + r.t);
        NormSnapshot s = r.norm_snapshot;
        s.t = r.t;
        SectionFive f = eval_YZP(s, cc, r.sobolev_E0);
        Pcal[k] = f.Pcal * r.sobolev_E0;
        expo[k] = (f.X + f.W + f.P + f.U) * r.sobolev_E1;
        F[k] = s.linf_F;
        Dp[k] = s.linf_Dphi;
        rep.G.push_back(s.linf_F + s.linf_Dphi);
    }
    std::vector<double> dE0 = time_derivative(E0, h), dE1 = time_derivative(E1, h);
    for (auto& v : dE0) v = std::abs(v);
    for (auto& v : dE1) v = std::abs(v);

    FitSummary fj = supremum_fit("C_N", J, envelope);
    FitSummary f0 = supremum_fit("C0", dE0, Pcal);
    FitSummary f1 = supremum_fit("E1_exponent", dE1, expo);
    rep.fits.C_N_fit = fj.value;
    rep.fits.C0_fit = f0.value;
    rep.fits.gronwall_fit = f1.value;
    std::tie(rep.fits.c0, rep.fits.c1) = linear_envelope(t, F);
    std::tie(rep.fits.k0, rep.fits.k1) = linear_envelope(t, Dp);
    rep.summaries = {fj, f0, f1};

    std::string text = "# N is evaluated as the sum of both groups of terms\n";
    text += "fit,value,half_max,final_quarter_max,full_max,stabilized,indeterminate,finite\n";
    for (const FitSummary& f : rep.summaries)
        text += fmt::format("{},{:.9e},{:.9e},{:.9e},{:.9e},{},{},{}\n", f.name, f.value, f.half_max,
                            f.final_quarter_max, f.full_max,
                            f.stabilized ? 1 : 0, f.indeterminate ? 1 : 0, f.finite ? 1 : 0);
    text += fmt::format("c0,{:.9e}\nc1,{:.9e}\nk0,{:.9e}\nk1,{:.9e}\n", rep.fits.c0, rep.fits.c1, rep.fits.k0,
                        rep.fits.k1);
    rep.text = text;
    return rep;
}

}  // namespace mkg
