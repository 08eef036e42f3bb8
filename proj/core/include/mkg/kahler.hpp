#pragma once

#include <array>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "mkg/types.hpp"

namespace mkg {

enum class KahlerKind { Flat, PolynomialRadial, Custom };

struct RadialDerivatives {
    double phi;
    double d1;
    double d2;
    double d3;
};

// Scalar pieces of the metric g = c δ + Q φ̄φ and of its derivative (qp = Q'/(2r)).
struct MetricScalars {
    double c;
    double Q;
    double qp;
};

struct KahlerFamily {
    KahlerKind kind = KahlerKind::Flat;
    // Φ(r) = Σ coefficients[n] r^n for PolynomialRadial.
    std::vector<double> coefficients{0.0, 0.0, 1.0};
    std::function<RadialDerivatives(double)> custom;
    // r → 0 limits of Φ'/(2r), Q and Q'/(2r) for Custom families.
    MetricScalars custom_limits{1.0, 0.0, 0.0};
    double r_max = 10.0;
    std::vector<double> b;
    double C1 = 0.0;
    double C2 = 0.0;
    double C3 = 0.0;
    double c1 = 2.0;
    double c2 = 0.0;
    bool lower_bound_configured = false;

    static KahlerFamily flat();
    static KahlerFamily polynomial(std::vector<double> coeffs);
    static KahlerFamily make_custom(std::function<RadialDerivatives(double)> f, MetricScalars limits);

    RadialDerivatives radial(double r) const;
    MetricScalars scalars(double r) const;
    void validate() const;
};

inline constexpr double kSmallRadius = 1e-8;

// Closed form from the radial derivatives; polynomial families use the equivalent cancellation-free series.
MetricScalars scalars_from_derivatives(const RadialDerivatives& d, double r);

// Dense N×N Hermitian storage; set() writes both (a,b) and (b,a).
class HermitianMatrixField {
public:
    explicit HermitianMatrixField(int dim);
    int dim() const { return dim_; }
    cplx operator()(int a, int b) const { return data_[a * dim_ + b]; }
    void set(int a, int b, cplx v);
    SmallCMat matrix() const;

private:
    int dim_;
    std::vector<cplx> data_;
};

// Entries [c][a][b] = ∂_c g_{ab̄}.
class MetricDerivative {
public:
    explicit MetricDerivative(int dim) : dim_(dim), data_(dim * dim * dim) {}
    int dim() const { return dim_; }
    cplx& operator()(int c, int a, int b) { return data_[(c * dim_ + a) * dim_ + b]; }
    cplx operator()(int c, int a, int b) const { return data_[(c * dim_ + a) * dim_ + b]; }

private:
    int dim_;
    std::vector<cplx> data_;
};

HermitianMatrixField kahler_metric(const KahlerFamily& family, std::span<const cplx> phi);
HermitianMatrixField kahler_metric_inverse(const KahlerFamily& family, std::span<const cplx> phi);
MetricDerivative kahler_metric_holomorphic_derivative(const KahlerFamily& family, std::span<const cplx> phi);

struct Lemma1Sample {
    double r;
    double lhs;
    double rhs;
    bool holds;
    double hypothesis_lhs;
    double hypothesis_rhs;
    double lower_bound;
    bool lower_holds;
};

struct Lemma1Report {
    std::vector<Lemma1Sample> samples;
    int violations = 0;
    int lower_violations = 0;
};

double lemma1_rhs(const KahlerFamily& family, double r);
Lemma1Report lemma1_bound_check(const KahlerFamily& family, std::span<const double> radii);

// Fits b_0 = max |Q'/(2r)| and C_2 (C_3 = |Φ(0)|, C_1 kept) over the given radii.
KahlerFamily fit_bound_constants(KahlerFamily family, std::span<const double> radii);

std::vector<double> uniform_radii(double r_hi, int count);

// Complex Hessian of K = Φ(|φ|) by 4th-order central differences in Re/Im parts.
HermitianMatrixField hessian_oracle(const KahlerFamily& family, std::span<const cplx> phi, double step = 1e-5);

std::string describe_q_normalization();

}  // namespace mkg
