#include "sorn/theorem_oracle.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace sorn::oracle {

using std::numbers::pi;

double TwoToneSignal::p() const { return static_cast<double>(std::lcm(a, b)); }
double TwoToneSignal::omega1() const { return 2.0 * static_cast<double>(a) * pi / p(); }
double TwoToneSignal::omega2() const { return 2.0 * static_cast<double>(b) * pi / p(); }

double TwoToneSignal::eval(double t) const {
    return c1 * std::cos(omega1() * t) + c2 * std::sin(omega2() * t);
}

TwoToneSignal TwoToneSignal::make(double c1, double c2, int a, int b) {
    if (a < 1 || b < 1 || a == b) throw std::invalid_argument("TwoToneSignal: need a,b >= 1 and a != b");
    if (!(c1 > c2)) throw std::invalid_argument("TwoToneSignal: need c1 > c2");
    TwoToneSignal s;
    s.c1 = c1;
    s.c2 = c2;
    s.a = a;
    s.b = b;
    return s;
}

double closed_form_weight(const TwoToneSignal& sig, double dt) {
    return 0.5 * sig.p() *
           (sig.c1 * sig.c1 * std::cos(sig.omega1() * dt) + sig.c2 * sig.c2 * std::cos(sig.omega2() * dt));
}

namespace {

// Composite Simpson over [t1, t1+p] of g(t) = f(t) * f(t + dt).
template <typename F>
double simpson_product(const F& f, double t1, double p, double dt, std::size_t n_intervals) {
    if (n_intervals % 2 == 1) ++n_intervals;
    const double h = p / static_cast<double>(n_intervals);
    auto g = [&](std::size_t i) {
        const double t = t1 + static_cast<double>(i) * h;
        return f(t) * f(t + dt);
    };
    double acc = g(0) + g(n_intervals);
    double odd = 0.0, even = 0.0;
    for (std::size_t i = 1; i < n_intervals; i += 2) odd += g(i);
    for (std::size_t i = 2; i < n_intervals; i += 2) even += g(i);
    return (acc + 4.0 * odd + 2.0 * even) * h / 3.0;
}

// Same Simpson sum with f precomputed over [0, 2p]; the shifted factor is the
// same array offset by the grid-aligned dt.
double simpson_product_grid(const std::vector<double>& f, std::size_t n_intervals, double h,
                            std::size_t shift) {
    auto g = [&](std::size_t i) { return f[i] * f[i + shift]; };
    double acc = g(0) + g(n_intervals);
    double odd = 0.0, even = 0.0;
    for (std::size_t i = 1; i < n_intervals; i += 2) odd += g(i);
    for (std::size_t i = 2; i < n_intervals; i += 2) even += g(i);
    return (acc + 4.0 * odd + 2.0 * even) * h / 3.0;
}

}  // namespace

double quadrature_weight(const TwoToneSignal& sig, double t1, double dt, double step) {
    const double p = sig.p();
    if (!(step <= p / 1e4)) throw std::invalid_argument("quadrature_weight: step must be <= p/1e4");
    const std::size_t n = static_cast<std::size_t>(std::ceil(p / step));
    return simpson_product([&](double t) { return sig.eval(t); }, t1, p, dt, n);
}

double theorem1_grid_error(const TwoToneSignal& sig, int grid_points, std::size_t n_intervals) {
    const double p = sig.p();
    if (n_intervals % static_cast<std::size_t>(grid_points) != 0)
        throw std::invalid_argument("theorem1_grid_error: grid must divide the Simpson intervals");
    const double h = p / static_cast<double>(n_intervals);
    const std::size_t per_dt = n_intervals / static_cast<std::size_t>(grid_points);

    std::vector<double> f(2 * n_intervals + 1);
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = sig.eval(static_cast<double>(i) * h);

    const double scale = sig.c1 * sig.c1 + sig.c2 * sig.c2;
    double worst = 0.0;
    for (int k = 0; k < grid_points; ++k) {
        const double dt = static_cast<double>(k) * p / static_cast<double>(grid_points);
        const double quad = simpson_product_grid(f, n_intervals, h, per_dt * static_cast<std::size_t>(k));
        worst = std::max(worst, std::abs(quad - closed_form_weight(sig, dt)) / scale);
    }
    return worst;
}

double FourierSignal::eval(double t) const {
    double acc = 0.5 * a0;
    for (std::size_t n = 0; n < a.size(); ++n) {
        const double w = 2.0 * static_cast<double>(n + 1) * pi / p;
        acc += a[n] * std::cos(w * t) + b[n] * std::sin(w * t);
    }
    return acc;
}

double FourierSignal::energy_scale() const {
    double acc = a0 * a0 * p / 4.0;
    for (std::size_t n = 0; n < a.size(); ++n) acc += 0.5 * p * (a[n] * a[n] + b[n] * b[n]);
    return acc;
}

double closed_form_general(const FourierSignal& sig, double dt) {
    double acc = sig.a0 * sig.a0 * sig.p / 4.0;
    for (std::size_t n = 0; n < sig.a.size(); ++n) {
        const double w = 2.0 * static_cast<double>(n + 1) * pi / sig.p;
        acc += 0.5 * sig.p * (sig.a[n] * sig.a[n] + sig.b[n] * sig.b[n]) * std::cos(w * dt);
    }
    return acc;
}

double quadrature_general(const FourierSignal& sig, double t1, double dt, double step) {
    if (!(step <= sig.p / 1e4)) throw std::invalid_argument("quadrature_general: step must be <= p/1e4");
    const std::size_t n = static_cast<std::size_t>(std::ceil(sig.p / step));
    return simpson_product([&](double t) { return sig.eval(t); }, t1, sig.p, dt, n);
}

double theorem2_grid_error(const FourierSignal& sig, int grid_points, std::size_t n_intervals) {
    if (n_intervals % static_cast<std::size_t>(grid_points) != 0)
        throw std::invalid_argument("theorem2_grid_error: grid must divide the Simpson intervals");
    const double h = sig.p / static_cast<double>(n_intervals);
    const std::size_t per_dt = n_intervals / static_cast<std::size_t>(grid_points);

    std::vector<double> f(2 * n_intervals + 1);
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = sig.eval(static_cast<double>(i) * h);

    const double scale = std::max(sig.energy_scale(), 1e-12);
    double worst = 0.0;
    for (int k = 0; k < grid_points; ++k) {
        const double dt = static_cast<double>(k) * sig.p / static_cast<double>(grid_points);
        const double quad = simpson_product_grid(f, n_intervals, h, per_dt * static_cast<std::size_t>(k));
        worst = std::max(worst, std::abs(quad - closed_form_general(sig, dt)) / scale);
    }
    return worst;
}

DominanceReport dominance_report(const TwoToneSignal& sig, int grid_points) {
    if (!(sig.c1 > sig.c2)) throw std::invalid_argument("dominance_report: requires c1 > c2");
    const double p = sig.p();
    DominanceReport rep;
    double best = -std::numeric_limits<double>::infinity();
    // Half-open lag grid (0, p]; the weight is p-periodic, so the closure
    // point p stands in for the supremum approached at the right edge.
    std::vector<double> grid_weights(static_cast<std::size_t>(grid_points) + 1);
    for (int k = 1; k <= grid_points; ++k) {
        const double dt = static_cast<double>(k) * p / static_cast<double>(grid_points);
        const double w = closed_form_weight(sig, dt);
        grid_weights[static_cast<std::size_t>(k)] = w;
        best = std::max(best, w);
    }
    rep.max_weight = best;
    const double tol = 1e-9 * (std::abs(best) + 1.0);
    rep.all_at_t1_multiples = true;
    for (int k = 1; k <= grid_points; ++k) {
        if (grid_weights[static_cast<std::size_t>(k)] < best - tol) continue;
        const double dt = static_cast<double>(k) * p / static_cast<double>(grid_points);
        rep.maximizers.push_back(dt);
        const double m1 = dt / sig.t1();
        const double m2 = dt / sig.t2();
        const bool t1_mult = std::abs(m1 - std::round(m1)) < 1e-6;
        const bool t2_mult = std::abs(m2 - std::round(m2)) < 1e-6;
        if (!t1_mult) rep.all_at_t1_multiples = false;
        if (t2_mult && !t1_mult) rep.any_t2_only = true;
    }
    return rep;
}

ToneFit fit_two_tones(const std::vector<double>& series, double period1, double period2) {
    const std::size_t n = series.size();
    const double w1 = 2.0 * pi / period1, w2 = 2.0 * pi / period2;
    // Normal equations over the basis [cos w1 t, sin w1 t, cos w2 t, sin w2 t, 1].
    constexpr std::size_t kBasis = 5;
    double ata[kBasis][kBasis] = {};
    double aty[kBasis] = {};
    for (std::size_t t = 0; t < n; ++t) {
        const double td = static_cast<double>(t);
        const double row[kBasis] = {std::cos(w1 * td), std::sin(w1 * td), std::cos(w2 * td),
                                    std::sin(w2 * td), 1.0};
        for (std::size_t i = 0; i < kBasis; ++i) {
            aty[i] += row[i] * series[t];
            for (std::size_t j = 0; j < kBasis; ++j) ata[i][j] += row[i] * row[j];
        }
    }
    // Gauss-Jordan with partial pivoting; the system ends up diagonal.
    for (std::size_t col = 0; col < kBasis; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < kBasis; ++r)
            if (std::abs(ata[r][col]) > std::abs(ata[piv][col])) piv = r;
        if (piv != col) {
            for (std::size_t j = 0; j < kBasis; ++j) std::swap(ata[col][j], ata[piv][j]);
            std::swap(aty[col], aty[piv]);
        }
        const double d = ata[col][col];
        if (std::abs(d) < 1e-12) throw std::runtime_error("fit_two_tones: singular normal equations");
        for (std::size_t r = 0; r < kBasis; ++r) {
            if (r == col) continue;
            const double factor = ata[r][col] / d;
            for (std::size_t j = 0; j < kBasis; ++j) ata[r][j] -= factor * ata[col][j];
            aty[r] -= factor * aty[col];
        }
    }
    ToneFit fit;
    fit.cos1 = aty[0] / ata[0][0];
    fit.sin1 = aty[1] / ata[1][1];
    fit.cos2 = aty[2] / ata[2][2];
    fit.sin2 = aty[3] / ata[3][3];
    fit.offset = aty[4] / ata[4][4];
    return fit;
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.empty()) throw std::invalid_argument("pearson: size mismatch");
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0) return 0.0;
    return sxy / std::sqrt(sxx * syy);
}

CompareReport compare_standard_vs_skimming(const CompareSpec& spec) {
    const std::size_t n = spec.slots;
    diff::Tensor x = diff::Tensor::matrix(n, 1, 0.0);
    std::vector<double> tone1(n), tone2(n);
    for (std::size_t t = 0; t < n; ++t) {
        const double td = static_cast<double>(t);
        tone1[t] = spec.amp1 * std::cos(2.0 * pi * td / spec.period1);
        tone2[t] = spec.amp2 * std::cos(2.0 * pi * td / spec.period2);
        x.at(t, 0) = tone1[t] + tone2[t];
    }

    // One-dimensional scheme: the transport layer degenerates to identity.
    data::IntervalScheme scalar_scheme({0.0, 1.0}, false);

    train::TrainConfig cfg_skim = spec.config;
    train::TrainConfig cfg_std = spec.config;
    cfg_std.disable_skimming = true;
    cfg_std.skimming_layers = 1;

    train::ModelCheckpoint skim = train::train_matrix(x, scalar_scheme, cfg_skim);
    train::ModelCheckpoint standard = train::train_matrix(x, scalar_scheme, cfg_std);

    std::vector<diff::Tensor> skim_layers;
    diff::Tensor recon_skim = model::reconstruct_matrix(skim.model, x, cfg_skim.flags(),
                                                        cfg_skim.window_length, &skim_layers);
    diff::Tensor recon_std =
        model::reconstruct_matrix(standard.model, x, cfg_std.flags(), cfg_std.window_length);

    auto column = [](const diff::Tensor& m) {
        std::vector<double> v(m.rows());
        for (std::size_t t = 0; t < m.rows(); ++t) v[t] = m.at(t, 0);
        return v;
    };
    auto low_rmse = [&](const std::vector<double>& recon) {
        const ToneFit fit = fit_two_tones(recon, spec.period1, spec.period2);
        const double dc = fit.cos2 - spec.amp2;
        return std::sqrt(0.5 * (dc * dc + fit.sin2 * fit.sin2));
    };

    CompareReport rep;
    rep.rmse_low_skimming = low_rmse(column(recon_skim));
    rep.rmse_low_standard = low_rmse(column(recon_std));

    const std::vector<double> layer0 = column(skim_layers[0]);
    rep.corr_layer0_high = pearson(layer0, tone1);
    rep.corr_layer0_low = pearson(layer0, tone2);
    const ToneFit fit0 = fit_two_tones(layer0, spec.period1, spec.period2);
    rep.layer0_fit_high = std::hypot(fit0.cos1, fit0.sin1);
    rep.layer0_fit_low = std::hypot(fit0.cos2, fit0.sin2);
    return rep;
}

}  // namespace sorn::oracle
