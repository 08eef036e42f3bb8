#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "mkg/diagnostics.hpp"
#include "mkg/potential.hpp"

namespace mkg {

struct EstimateConstants {
    // b[n] for n = 0, 1, ...; entries past the end count as zero.
    std::vector<double> b;
    double C1 = 0.0;
    double C2 = 0.0;
    double C3 = 0.0;
    double c4 = 1.0;
    int N = 1;
    double J0 = 0.0;
    PotentialKind potential_kind = PotentialKind::Polynomial;

    double bn(int n) const { return n >= 0 && n < int(b.size()) ? b[n] : 0.0; }
    void validate() const;
};

double eval_O(const NormSnapshot& s, const EstimateConstants& c);
double eval_I(const NormSnapshot& s, const EstimateConstants& c);
double eval_D_func(const NormSnapshot& s, const EstimateConstants& c);
double eval_H_func(const NormSnapshot& s, const EstimateConstants& c);

struct LMN {
    double L, M, N;
};
LMN eval_LMN(const NormSnapshot& s, const EstimateConstants& c);

struct SXUW {
    double S, X, U, W;
};
SXUW eval_SXUW(const NormSnapshot& s, const EstimateConstants& c);

struct SectionFive {
    double Y, Z, Pcal, X, W, P, U, Ztilde, Zhat, S, T, Zcal, chi;
};
SectionFive eval_YZP(const NormSnapshot& s, const EstimateConstants& c, double E0_sf);

// Symbolic form: every functional as an expanded list of monomials in the norms.
enum BoundVar { kVarPhi, kVarDphi, kVarCovD, kVarF, kVarA, kVarDPsi, kVarE, kVarT, kVarCount };

struct Monomial {
    double coef = 0.0;
    std::array<int, kVarCount> powers{};
};
using MonomialList = std::vector<Monomial>;

std::array<double, kVarCount> bound_variables(const NormSnapshot& s, double E0_sf);
double evaluate(const MonomialList& m, const std::array<double, kVarCount>& vars);
std::map<std::string, MonomialList> monomial_lists(const EstimateConstants& c);

// Fast evaluation of every functional keyed like monomial_lists.
std::map<std::string, double> all_functionals(const NormSnapshot& s, const EstimateConstants& c, double E0_sf);

struct FittedConstants {
    double C_N_fit = 0.0;
    double C0_fit = 0.0;
    double gronwall_fit = 0.0;
    double c0 = 0.0;
    double c1 = 0.0;
    double k0 = 0.0;
    double k1 = 0.0;
};

struct FitSummary {
    std::string name;
    double value = 0.0;
    double half_max = 0.0;
    double final_quarter_max = 0.0;
    double full_max = 0.0;
    bool stabilized = false;
    bool indeterminate = false;
    bool finite = true;
};

struct GronwallReport {
    FittedConstants fits;
    std::vector<FitSummary> summaries;
    std::vector<double> G;
    std::string text;
};

GronwallReport audit_gronwall(const std::vector<DiagnosticsRecord>& trace, const EstimateConstants& c);

}  // namespace mkg
