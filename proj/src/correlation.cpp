#include "superrad/correlation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "superrad/semiclassical.hpp"

namespace superrad {

namespace {

// Accumulates sum and sum of squares of the per-trigger normalized counts.
struct BinAccumulator {
    std::vector<double> sum, sumsq;
    long n_triggers = 0;

    explicit BinAccumulator(int n_lags) : sum(n_lags, 0.0), sumsq(n_lags, 0.0) {}

    void add_trigger(const std::vector<double>& normalized_counts) {
        for (std::size_t j = 0; j < sum.size(); ++j) {
            sum[j] += normalized_counts[j];
            sumsq[j] += normalized_counts[j] * normalized_counts[j];
        }
        ++n_triggers;
    }
};

} // namespace

G2Estimate g2_histogram(const std::vector<JumpRecord>& records,
                        const std::string& channel, double bin_width,
                        int n_lags, const G2Window& window) {
    if (records.empty()) throw ConfigError("g2_histogram: no records");
    if (bin_width <= 0) throw ConfigError("g2_histogram: bin_width must be > 0");
    if (n_lags < 1) throw ConfigError("g2_histogram: n_lags must be >= 1");

    BinAccumulator acc(n_lags);
    long n_bins_total = 0;
    double window_start = 0.0, window_end = 0.0;
    bool first = true;
    std::vector<double> counts(n_lags);

    for (const auto& rec : records) {
        const double t0 = window.start.value_or(rec.burn_in);
        const double t_end_raw = window.end.value_or(rec.total_time);
        if (t_end_raw - t0 < bin_width)
            throw ConfigError("g2_histogram: bin_width larger than the analysis "
                              "window");
        // Whole bins only; the rate normalization and the trigger validity
        // rule both use the truncated window end.
        const long n_bins = long((t_end_raw - t0) / bin_width * (1 + 1e-12));
        const double t_end = t0 + double(n_bins) * bin_width;
        if (first) {
            window_start = t0;
            window_end = t_end;
            first = false;
        }

        std::vector<double> events;
        events.reserve(rec.events.size());
        for (const auto& e : rec.events)
            if (rec.label(e) == channel && e.time >= t0 && e.time <= t_end)
                events.push_back(e.time);
        if (events.empty()) continue;
        const double mean_per_bin = double(events.size()) / double(n_bins);

        const double lag_span = double(n_lags) * bin_width;
        for (std::size_t i = 0; i < events.size(); ++i) {
            const double ti = events[i];
            if (ti + lag_span > t_end) break; // trigger window must fit
            std::fill(counts.begin(), counts.end(), 0.0);
            for (std::size_t k = i + 1; k < events.size(); ++k) {
                const double dt = events[k] - ti;
                if (dt > lag_span) break;
                // bin j covers (j*bin_width, (j+1)*bin_width]
                long j = long(std::ceil(dt / bin_width)) - 1;
                if (j < 0) j = 0;
                if (j >= n_lags) continue;
                counts[std::size_t(j)] += 1.0;
            }
            for (double& c : counts) c /= mean_per_bin;
            acc.add_trigger(counts);
        }
        n_bins_total += n_bins;
    }

    if (acc.n_triggers == 0)
        throw EmptyEstimateError("g2_histogram: no valid triggers of channel '" +
                                 channel + "' in the analysis window");

    G2Estimate est;
    est.bin_width = bin_width;
    est.n_phot = acc.n_triggers;
    est.n_bins = n_bins_total;
    est.window_start = window_start;
    est.window_end = window_end;
    est.values.resize(n_lags);
    est.std_errors.resize(n_lags);
    const double n = double(acc.n_triggers);
    for (int j = 0; j < n_lags; ++j) {
        const double mean = acc.sum[j] / n;
        est.values[j] = mean;
        if (acc.n_triggers > 1) {
            const double var =
                std::max(0.0, (acc.sumsq[j] - n * mean * mean) / (n - 1.0));
            est.std_errors[j] = std::sqrt(var / n);
        }
    }
    return est;
}

G2ZeroEstimate g2_zero_from_states(const EnsembleResult& ensemble,
                                   const OperatorSet& ops) {
    const char* num_name = ops.model == ModelTag::Full ? "nn_phot" : "jppjmm";
    const char* den_name = ops.model == ModelTag::Full ? "n_phot" : "jpjm";
    if (!ensemble.has_observable(num_name) || !ensemble.has_observable(den_name))
        throw ConfigError(std::string("g2_zero_from_states needs observables '") +
                          num_name + "' and '" + den_name +
                          "' sampled past burn-in");
    const auto& num = ensemble.observable(num_name);
    const auto& den = ensemble.observable(den_name);
    const std::size_t n = num.per_trajectory_mean.size();

    auto ratio = [](double a, double b) { return a / (b * b); };
    double num_mean = 0.0, den_mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        num_mean += num.per_trajectory_mean[i];
        den_mean += den.per_trajectory_mean[i];
    }
    num_mean /= double(n);
    den_mean /= double(n);

    G2ZeroEstimate out;
    if (den_mean <= 1e-14) return out; // dark ensemble: undefined
    out.defined = true;
    out.value = ratio(num_mean, den_mean);
    if (n > 1) {
        // Leave-one-out jackknife over trajectories.
        double ss = 0.0;
        std::vector<double> loo(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double nm =
                (num_mean * double(n) - num.per_trajectory_mean[i]) / double(n - 1);
            const double dm =
                (den_mean * double(n) - den.per_trajectory_mean[i]) / double(n - 1);
            loo[i] = ratio(nm, dm);
        }
        double loo_mean = 0.0;
        for (double v : loo) loo_mean += v;
        loo_mean /= double(n);
        for (double v : loo) ss += (v - loo_mean) * (v - loo_mean);
        out.std_error = std::sqrt((double(n) - 1.0) / double(n) * ss);
    }
    return out;
}

double intensity_variance(double mean_flux, double g2_zero, double bandwidth) {
    if (mean_flux < 0 || bandwidth < 0)
        throw ConfigError("intensity_variance: flux and bandwidth must be >= 0");
    if (mean_flux == 0.0) return 0.0;
    return mean_flux * mean_flux * (g2_zero - 1.0) + bandwidth * mean_flux;
}

double default_bin_width(double pump, int n_atoms, double gamma_c) {
    switch (classify_regime(pump, n_atoms, gamma_c)) {
        case Regime::Subradiant:
        case Regime::LowerThreshold:
            return 0.1 / gamma_c;
        case Regime::Superradiant:
        case Regime::UpperThreshold:
            return 0.02 / gamma_c;
        case Regime::StrongPumping:
            return 0.1 / pump;
    }
    return 0.1 / gamma_c;
}

ExpDecayFit fit_exponential_decay(const G2Estimate& est, double tau_max) {
    // Bin-averaged model over bin j (left edge tau_j = j*dt):
    //   m_j(A, tau) = 1 + A exp(-tau_j/tau) * s(dt/tau),
    //   s(x) = (1 - exp(-x))/x.
    // A is solved in closed form per tau; tau by golden-section on the
    // weighted SSE.
    std::vector<double> y, w, tau_left;
    for (std::size_t j = 0; j < est.values.size(); ++j) {
        if (est.lag(j) + est.bin_width > tau_max) break;
        const double se = est.std_errors[j];
        if (!(se > 0)) continue;
        y.push_back(est.values[j] - 1.0);
        w.push_back(1.0 / (se * se));
        tau_left.push_back(est.lag(j));
    }
    if (y.size() < 3)
        throw NumericalError("fit_exponential_decay: fewer than 3 usable bins");

    const double dt = est.bin_width;
    auto solve_amplitude = [&](double tau, double* sse, double* sum_wf2) {
        const double x = dt / tau;
        const double shape = x > 1e-8 ? -std::expm1(-x) / x : 1.0 - 0.5 * x;
        double swfy = 0.0, swff = 0.0;
        for (std::size_t j = 0; j < y.size(); ++j) {
            const double f = std::exp(-tau_left[j] / tau) * shape;
            swfy += w[j] * f * y[j];
            swff += w[j] * f * f;
        }
        const double a = swff > 0 ? swfy / swff : 0.0;
        if (sse) {
            double s = 0.0;
            for (std::size_t j = 0; j < y.size(); ++j) {
                const double f = std::exp(-tau_left[j] / tau) * shape;
                const double r = y[j] - a * f;
                s += w[j] * r * r;
            }
            *sse = s;
        }
        if (sum_wf2) *sum_wf2 = swff;
        return a;
    };

    // Coarse log-spaced scan, then golden-section refinement.
    const double lo = dt * 0.2, hi = std::max(tau_max * 4.0, dt * 10.0);
    double best_tau = lo, best_sse = std::numeric_limits<double>::infinity();
    const int n_scan = 200;
    for (int i = 0; i <= n_scan; ++i) {
        const double tau =
            lo * std::pow(hi / lo, double(i) / double(n_scan));
        double sse;
        solve_amplitude(tau, &sse, nullptr);
        if (sse < best_sse) {
            best_sse = sse;
            best_tau = tau;
        }
    }
    double a = best_tau / std::pow(hi / lo, 1.0 / n_scan);
    double b = best_tau * std::pow(hi / lo, 1.0 / n_scan);
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
    double f1, f2;
    solve_amplitude(x1, &f1, nullptr);
    solve_amplitude(x2, &f2, nullptr);
    for (int it = 0; it < 120 && (b - a) > 1e-10 * b; ++it) {
        if (f1 < f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - gr * (b - a);
            solve_amplitude(x1, &f1, nullptr);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + gr * (b - a);
            solve_amplitude(x2, &f2, nullptr);
        }
    }
    ExpDecayFit fit;
    fit.tau = 0.5 * (a + b);
    double swff;
    fit.amplitude = solve_amplitude(fit.tau, &fit.chi2, &swff);
    fit.n_points = long(y.size());
    fit.amplitude_err = swff > 0 ? 1.0 / std::sqrt(swff) : 0.0;
    // 1-sigma interval on tau from the chi^2 = chi2_min + 1 profile.
    {
        auto chi2_at = [&](double tau) {
            double s;
            solve_amplitude(tau, &s, nullptr);
            return s;
        };
        const double target = fit.chi2 + 1.0;
        double hi_t = fit.tau;
        for (int i = 0; i < 200 && chi2_at(hi_t) < target; ++i) hi_t *= 1.05;
        double lo_t = fit.tau;
        for (int i = 0; i < 200 && chi2_at(lo_t) < target && lo_t > dt * 0.01; ++i)
            lo_t /= 1.05;
        fit.tau_err = 0.5 * (hi_t - lo_t);
    }
    return fit;
}

void write_g2_csv(std::ostream& out, const G2Estimate& est,
                  std::optional<double> thermal_pump) {
    char buf[64];
    out << "# g2_csv_schema " << kG2CsvSchemaVersion << "\n";
    std::snprintf(buf, sizeof buf, "%.17g", est.bin_width);
    out << "# bin_width " << buf << "\n";
    std::snprintf(buf, sizeof buf, "%.17g", est.window_start);
    out << "# window_start " << buf << "\n";
    std::snprintf(buf, sizeof buf, "%.17g", est.window_end);
    out << "# window_end " << buf << "\n";
    out << "# n_phot " << est.n_phot << "\n";
    out << "# n_bins " << est.n_bins << "\n";
    out << (thermal_pump ? "tau,g2,g2_err,thermal" : "tau,g2,g2_err") << "\n";
    for (std::size_t j = 0; j < est.values.size(); ++j) {
        std::snprintf(buf, sizeof buf, "%.17g", est.lag(j));
        out << buf << ',';
        std::snprintf(buf, sizeof buf, "%.17g", est.values[j]);
        out << buf << ',';
        std::snprintf(buf, sizeof buf, "%.17g", est.std_errors[j]);
        out << buf;
        if (thermal_pump) {
            std::snprintf(buf, sizeof buf, "%.17g",
                          thermal_g2(est.lag(j), *thermal_pump));
            out << ',' << buf;
        }
        out << "\n";
    }
}

void write_g2_csv_file(const std::string& path, const G2Estimate& est,
                       std::optional<double> thermal_pump) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write CSV: " + path);
    write_g2_csv(out, est, thermal_pump);
}

} // namespace superrad
