// Second-order intensity correlation estimation from jump records, plus
// derived intensity-noise quantities.
#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "superrad/trajectory.hpp"
#include "superrad/types.hpp"

namespace superrad {

/// Binned g2(j*dt) with per-bin standard errors.
struct G2Estimate {
    double bin_width = 0.0;
    std::vector<double> values;     ///< g2 at lags (0..J-1) * bin_width
    std::vector<double> std_errors; ///< 1-sigma, per-trigger independence model
    long n_phot = 0;                ///< number of valid triggers used
    long n_bins = 0;                ///< bins of the analyzed window (summed across pooled records)
    double window_start = 0.0;
    double window_end = 0.0;

    double lag(std::size_t j) const { return double(j) * bin_width; }
};

/// Thrown when no valid trigger exists in the analysis window.
struct EmptyEstimateError : NumericalError {
    explicit EmptyEstimateError(const std::string& m) : NumericalError(m) {}
};

/// Optional window override; defaults to [burn_in, total_time] per record.
struct G2Window {
    std::optional<double> start;
    std::optional<double> end;
};

/// Histogram estimator of g2(tau) following the decay-time binning
/// procedure:
///   n_{i,j} = #events in (t_i + j dt, t_i + (j+1) dt],
///   g2(j dt) = mean_i n_{i,j} / (rate * dt),
/// where a trigger t_i is valid only if its whole lag window fits inside the
/// analysis window, and rate counts post-burn-in events of the chosen
/// channel.  Multiple records pool triggers with per-record normalization
/// (photon-weighted combination); errors treat per-trigger histograms as
/// independent.
G2Estimate g2_histogram(const std::vector<JumpRecord>& records,
                        const std::string& channel, double bin_width,
                        int n_lags, const G2Window& window = {});

/// Ratio-of-moments estimator of g2(0) from sampled states:
/// <J+J+J-J->/<J+J->^2 (adiabatic) or <a^dag a^dag a a>/<a^dag a>^2 (full),
/// ensemble-and-time averaged.  Standard error by leave-one-trajectory-out
/// jackknife.  Cross-checks the first histogram bin.
struct G2ZeroEstimate {
    double value = 0.0;
    double std_error = 0.0;
    bool defined = false; ///< false when the mean flux vanishes
};
G2ZeroEstimate g2_zero_from_states(const EnsembleResult& ensemble,
                                   const OperatorSet& ops);

/// Detector-bandwidth intensity noise: I^2 (g2(0) - 1) + B I.
double intensity_variance(double mean_flux, double g2_zero, double bandwidth);

/// Default bin widths per regime: 0.1/Gamma_c (subradiant), 0.02/Gamma_c
/// (superradiant), 0.1/w (strong pumping).
double default_bin_width(double pump, int n_atoms, double gamma_c);

/// Weighted least-squares fit of g2(tau) ~ 1 + A exp(-tau/tau_c) with the
/// model bin-averaged over each lag bin, so A estimates the true zero-lag
/// excess free of binning bias.
struct ExpDecayFit {
    double amplitude = 0.0;  ///< A
    double tau = 0.0;        ///< tau_c
    double amplitude_err = 0.0;
    double tau_err = 0.0;
    double chi2 = 0.0;
    long n_points = 0;
    double g2_zero() const { return 1.0 + amplitude; }
};
ExpDecayFit fit_exponential_decay(const G2Estimate& est, double tau_max);

/// CSV export: "tau,g2,g2_err" with a schema-versioned header carrying
/// bin width, window and trigger count.  An optional thermal reference
/// column appends "thermal" values 1 + exp(-tau w / pi).
inline constexpr int kG2CsvSchemaVersion = 1;
void write_g2_csv(std::ostream& out, const G2Estimate& est,
                  std::optional<double> thermal_pump = std::nullopt);
void write_g2_csv_file(const std::string& path, const G2Estimate& est,
                       std::optional<double> thermal_pump = std::nullopt);

} // namespace superrad
