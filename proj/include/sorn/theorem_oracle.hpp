#pragma once

#include <cstdint>
#include <vector>

#include "sorn/tensor.hpp"
#include "sorn/trainer.hpp"

namespace sorn::oracle {

/// Two-tone compound-periodic signal c1*cos(w1 t) + c2*sin(w2 t) with integer
/// frequency indices a != b over patch length p = lcm(a, b). Requires c1 > c2.
struct TwoToneSignal {
    double c1 = 2.0, c2 = 1.0;
    int a = 1, b = 2;

    double p() const;       // lcm(a, b)
    double omega1() const;  // 2*a*pi / p
    double omega2() const;  // 2*b*pi / p
    double t1() const { return p() / a; }
    double t2() const { return p() / b; }
    double eval(double t) const;

    static TwoToneSignal make(double c1, double c2, int a, int b);
};

/// Closed-form unsoftmaxed attention weight between patches dt apart:
/// (p/2) (c1^2 cos(w1 dt) + c2^2 cos(w2 dt)).
double closed_form_weight(const TwoToneSignal& sig, double dt);

/// Composite Simpson quadrature of the patch inner product
/// integral over [t1, t1 + p] of f(t) f(t + dt) dt. Step must be <= p/1e4.
double quadrature_weight(const TwoToneSignal& sig, double t1, double dt, double step);

/// Fast full-grid check for one signal: dt on grid_points over [0, p) with
/// n_intervals Simpson subintervals; returns the max |quadrature - closed|
/// normalized by c1^2 + c2^2.
double theorem1_grid_error(const TwoToneSignal& sig, int grid_points, std::size_t n_intervals);

/// Truncated trigonometric series a0/2 + sum_n (a_n cos(w_n t) + b_n sin(w_n t)).
struct FourierSignal {
    double a0 = 0.0;
    std::vector<double> a, b;  // n = 1..N
    double p = 2.0;

    double eval(double t) const;
    double energy_scale() const;  // a0^2 p/4 + (p/2) sum (a_n^2 + b_n^2)
};

/// Closed-form general weight a0^2 p/4 + (p/2) sum (a_n^2 + b_n^2) cos(w_n dt).
double closed_form_general(const FourierSignal& sig, double dt);
double quadrature_general(const FourierSignal& sig, double t1, double dt, double step);
double theorem2_grid_error(const FourierSignal& sig, int grid_points, std::size_t n_intervals);

struct DominanceReport {
    std::vector<double> maximizers;  // dt in (0, p) within tolerance of the max
    bool all_at_t1_multiples = false;
    bool any_t2_only = false;  // a maximizer at a T2 multiple that is not a T1 multiple
    double max_weight = 0.0;
};

/// Dense-grid argmax of the closed-form weight over (0, p).
DominanceReport dominance_report(const TwoToneSignal& sig, int grid_points = 20000);

/// Least-squares decomposition of a series onto two tones plus a constant.
struct ToneFit {
    double cos1 = 0.0, sin1 = 0.0, cos2 = 0.0, sin2 = 0.0, offset = 0.0;
};
ToneFit fit_two_tones(const std::vector<double>& series, double period1, double period2);

double pearson(const std::vector<double>& x, const std::vector<double>& y);

struct CompareSpec {
    double amp1 = 5.0, period1 = 48.0;
    double amp2 = 1.0, period2 = 12.0;
    std::size_t slots = 2000;
    train::TrainConfig config;  // window/patch/layers/epochs for both runs
};

struct CompareReport {
    double rmse_low_standard = 0.0;
    double rmse_low_skimming = 0.0;
    double corr_layer0_high = 0.0;  // layer-0 output vs high-amplitude tone
    double corr_layer0_low = 0.0;
    double layer0_fit_high = 0.0;  // fitted amplitude of each tone in layer 0
    double layer0_fit_low = 0.0;
};

/// Trains one standard-attention model (single layer, gate off) and one
/// skimming stack identically on the two-tone series, reconstructs both, and
/// reports the low-amplitude component RMSE of each plus layer-0 statistics.
CompareReport compare_standard_vs_skimming(const CompareSpec& spec);

}  // namespace sorn::oracle
