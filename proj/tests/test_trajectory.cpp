#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "superrad/correlation.hpp"
#include "superrad/liouville.hpp"
#include "superrad/semiclassical.hpp"
#include "superrad/trajectory.hpp"

using namespace superrad;

namespace {

OperatorSet adiabatic(int n, double w) {
    return build_adiabatic_model(SystemParams::adiabatic(n, 1.0, w));
}

StateVector state_of(Vec v) {
    StateVector s;
    s.amplitudes = std::move(v);
    return s;
}

std::string serialize(const std::vector<JumpRecord>& recs) {
    std::ostringstream os;
    for (const auto& r : recs) write_record(os, r);
    return os.str();
}

} // namespace

TEST_CASE("single excited atom emits exactly one photon with an exponential "
          "waiting time") {
    const OperatorSet ops = adiabatic(1, 0.0);
    const Engine engine(ops);
    std::vector<double> waits;
    for (uint64_t seed = 1; seed <= 1000; ++seed) {
        const auto res =
            engine.run(state_of(ops.all_excited_state()), 50.0, seed);
        REQUIRE(res.record.events.size() == 1);
        CHECK(res.record.label(res.record.events[0]) == "cavity");
        waits.push_back(res.record.events[0].time);
        // After the jump the atom is dark.
        CHECK(std::abs(res.final_state.amplitudes(0)) == doctest::Approx(1.0));
    }
    // One-sample Kolmogorov-Smirnov against Exp(1), 1% level.
    std::sort(waits.begin(), waits.end());
    double d = 0.0;
    const double n = double(waits.size());
    for (std::size_t i = 0; i < waits.size(); ++i) {
        const double f = 1.0 - std::exp(-waits[i]);
        d = std::max(d, std::abs(f - double(i) / n));
        d = std::max(d, std::abs(f - double(i + 1) / n));
    }
    CHECK(d * std::sqrt(n) < 1.628);
}

TEST_CASE("jump time solves the norm-threshold equation") {
    // For a single decaying atom the survival is exp(-Gamma_c t), so the
    // first jump lands at -ln r; checks the threshold contract and the
    // bisection refinement on both backends.
    const OperatorSet ops = adiabatic(1, 0.0);
    for (Integrator integ : {Integrator::Spectral, Integrator::Rk4}) {
        EngineOptions opt;
        opt.integrator = integ;
        const Engine engine(ops, opt);
        for (uint64_t seed : {7ull, 99ull, 123456ull}) {
            const double r = CounterRng(seed).threshold();
            const auto res =
                engine.run(state_of(ops.all_excited_state()), 50.0, seed);
            REQUIRE(res.record.events.size() == 1);
            const double expected = -std::log(r);
            CHECK(res.record.events[0].time ==
                  doctest::Approx(expected).epsilon(1e-6));
        }
    }
}

TEST_CASE("a ground-state atom without pumping never jumps") {
    const OperatorSet ops = adiabatic(1, 0.0);
    const auto [rec, fin] =
        run_trajectory(ops, state_of(ops.ground_state()), 30.0, 5);
    CHECK(rec.events.empty());
    CHECK(std::abs(fin.amplitudes(0)) == doctest::Approx(1.0));
}

TEST_CASE("decoupled cavity stays in vacuum: pump events only") {
    SystemParams p;
    p.n_atoms = 2;
    p.coupling = 0.0;
    p.kappa = 5.0;
    p.pump = 1.5;
    p.photon_cutoff = 1;
    const OperatorSet ops = build_full_model(p);
    const auto [rec, fin] =
        run_trajectory(ops, state_of(ops.ground_state()), 40.0, 11);
    CHECK(rec.events.size() > 0);
    for (const auto& e : rec.events)
        CHECK(rec.label(e).substr(0, 4) == "pump");
    CHECK(rec.count_events("cavity", 0.0, rec.total_time) == 0);
}

TEST_CASE("ensemble output is independent of the worker count") {
    const OperatorSet ops = adiabatic(3, 2.0);
    EnsembleConfig cfg;
    cfg.n_trajectories = 6;
    cfg.duration = 40.0;
    cfg.burn_in = 5.0;
    cfg.master_seed = 2024;
    cfg.observables = {"s", "jpjm"};
    cfg.threads = 1;
    const EnsembleResult a = run_ensemble(ops, cfg);
    cfg.threads = 3;
    const EnsembleResult b = run_ensemble(ops, cfg);
    REQUIRE(a.records.size() == 6);
    CHECK(serialize(a.records) == serialize(b.records));
    for (std::size_t k = 0; k < a.observables.size(); ++k)
        for (int i = 0; i < 6; ++i)
            CHECK(a.observables[k].per_trajectory_mean[i] ==
                  b.observables[k].per_trajectory_mean[i]);
    // Bit-for-bit reproducible against a fresh run of the same config.
    cfg.threads = 2;
    CHECK(serialize(run_ensemble(ops, cfg).records) == serialize(a.records));
}

TEST_CASE("a single-trajectory ensemble wraps one engine run") {
    const OperatorSet ops = adiabatic(2, 1.0);
    EnsembleConfig cfg;
    cfg.n_trajectories = 1;
    cfg.duration = 25.0;
    cfg.burn_in = 2.0;
    cfg.master_seed = 77;
    const EnsembleResult ens = run_ensemble(ops, cfg);
    REQUIRE(ens.records.size() == 1);
    // Reproduce the same single trajectory directly (same sampling stops:
    // the crossing bisection brackets depend on where the engine pauses).
    EngineOptions opt;
    opt.sample_stride = cfg.sample_stride;
    const Engine engine(ops, opt);
    SampleSpec spec;
    spec.stride = cfg.sample_stride;
    spec.burn_in = cfg.burn_in;
    StateVector init;
    init.amplitudes = ops.ground_state();
    const auto res = engine.run(init, 25.0, derive_stream_seed(77, 0), &spec);
    REQUIRE(res.record.events.size() == ens.records[0].events.size());
    for (std::size_t i = 0; i < res.record.events.size(); ++i)
        CHECK(res.record.events[i].time == ens.records[0].events[i].time);
    // And an unsampled run reproduces the same jump sequence within the
    // refinement tolerance.
    const auto [rec, fin] = run_trajectory(ops, init, 25.0,
                                           derive_stream_seed(77, 0), opt);
    REQUIRE(rec.events.size() == ens.records[0].events.size());
    for (std::size_t i = 0; i < rec.events.size(); ++i)
        CHECK(rec.events[i].time ==
              doctest::Approx(ens.records[0].events[i].time).epsilon(1e-8));
}

TEST_CASE("backends agree on the jump sequence for a fixed seed") {
    const OperatorSet ops = adiabatic(3, 2.0);
    std::vector<JumpRecord> recs;
    for (Integrator integ :
         {Integrator::Spectral, Integrator::Expm, Integrator::Rk4}) {
        EngineOptions opt;
        opt.integrator = integ;
        opt.sample_stride = 0.5;
        const Engine engine(ops, opt);
        recs.push_back(engine.run(state_of(ops.ground_state()), 8.0, 91).record);
    }
    REQUIRE(recs[0].events.size() > 3);
    for (std::size_t b = 1; b < recs.size(); ++b) {
        REQUIRE(recs[b].events.size() == recs[0].events.size());
        for (std::size_t i = 0; i < recs[0].events.size(); ++i) {
            CHECK(recs[b].events[i].channel == recs[0].events[i].channel);
            CHECK(recs[b].events[i].time ==
                  doctest::Approx(recs[0].events[i].time).epsilon(1e-6));
        }
    }
}

TEST_CASE("ensemble moments match the dense steady state (N=3, w=5)") {
    const int n = 3;
    const double w = 5.0;
    const OperatorSet ops = adiabatic(n, w);
    const auto dense = steady_state(build_liouvillian(ops), ops);
    const ExactMoments m = exact_moments(dense.rho, ops);

    EnsembleConfig cfg;
    cfg.n_trajectories = 32;
    cfg.duration = 220.0;
    cfg.burn_in = 20.0;
    cfg.master_seed = 5;
    cfg.sample_stride = 0.25;
    cfg.observables = {"s", "p", "jpjm", "jppjmm"};
    const EnsembleResult ens = run_ensemble(ops, cfg);

    auto check3 = [&](const char* name, double exact) {
        const auto& st = ens.observable(name);
        CAPTURE(name);
        CHECK(std::abs(st.mean - exact) < 3.0 * st.std_error);
    };
    check3("s", m.s);
    check3("p", m.p);
    check3("jpjm", m.jp_jm);

    const G2ZeroEstimate g2 = g2_zero_from_states(ens, ops);
    REQUIRE(g2.defined);
    CHECK(std::abs(g2.value - *m.g2_zero) < 3.0 * g2.std_error);

    // Cavity event rate balances Gamma_c <J+J->.
    const RateEstimate rate = cavity_rate(ens);
    CHECK(std::abs(rate.mean - m.jp_jm) < 3.0 * rate.std_error);
}

TEST_CASE("mean cavity rate matches the pair-correlation prediction at N=10") {
    const OperatorSet ops = adiabatic(10, 5.0);
    EnsembleConfig cfg;
    cfg.n_trajectories = 8;
    cfg.duration = 40.0;
    cfg.burn_in = 8.0;
    cfg.master_seed = 31;
    const EnsembleResult ens = run_ensemble(ops, cfg);
    const RateEstimate rate = cavity_rate(ens);
    CumulantParams cp{10, 5.0, 1.0};
    const double predicted = collective_intensity(closed_form_steady_state(cp));
    // 3 sigma statistics plus a small allowance for the pair-closure error.
    CHECK(std::abs(rate.mean - predicted) <
          3.0 * rate.std_error + 0.03 * predicted);
}

TEST_CASE("permutation symmetry of per-atom inversions") {
    const OperatorSet ops = adiabatic(3, 2.0);
    EnsembleConfig cfg;
    cfg.n_trajectories = 24;
    cfg.duration = 120.0;
    cfg.burn_in = 15.0;
    cfg.master_seed = 8;
    cfg.observables = {"sz_1", "sz_2", "sz_3"};
    const EnsembleResult ens = run_ensemble(ops, cfg);
    const auto& a = ens.observable("sz_1");
    const auto& b = ens.observable("sz_2");
    const auto& c = ens.observable("sz_3");
    const double err = 3.0 * std::sqrt(a.std_error * a.std_error +
                                       b.std_error * b.std_error);
    CHECK(std::abs(a.mean - b.mean) < err);
    CHECK(std::abs(a.mean - c.mean) < err);
}

TEST_CASE("full model: photon flux balance and bad-cavity agreement") {
    SystemParams p;
    p.n_atoms = 2;
    p.coupling = std::sqrt(400.0);
    p.kappa = 400.0; // Gamma_c = 1, kappa = 200 N Gamma_c
    p.pump = 2.0;
    p.photon_cutoff = 4;
    const OperatorSet full = build_full_model(p);
    EnsembleConfig cfg;
    cfg.n_trajectories = 8;
    cfg.duration = 150.0;
    cfg.burn_in = 10.0;
    cfg.master_seed = 12;
    cfg.sample_stride = 0.1;
    cfg.observables = {"n_phot", "jpjm"};
    const EnsembleResult ens = run_ensemble(full, cfg);
    const RateEstimate rate = cavity_rate(ens);
    const auto& nphot = ens.observable("n_phot");
    // kappa <a^dag a> equals the long-time cavity event rate.
    CHECK(std::abs(rate.mean - p.kappa * nphot.mean) <
          3.0 * std::sqrt(rate.std_error * rate.std_error +
                          p.kappa * p.kappa * nphot.std_error * nphot.std_error));

    // And the adiabatic model reproduces the same emission rate.
    const OperatorSet ad = build_adiabatic_model(p);
    EnsembleConfig cfg_ad = cfg;
    cfg_ad.observables = {"jpjm"};
    const EnsembleResult ens_ad = run_ensemble(ad, cfg_ad);
    const RateEstimate rate_ad = cavity_rate(ens_ad);
    CHECK(std::abs(rate.mean - rate_ad.mean) <
          3.0 * std::sqrt(rate.std_error * rate.std_error +
                          rate_ad.std_error * rate_ad.std_error) +
              0.02 * rate.mean);
}

TEST_CASE("photon-cutoff violations abort with a diagnostic") {
    SystemParams p;
    p.n_atoms = 1;
    p.coupling = 3.0;
    p.kappa = 1.0; // good cavity: photons pile up
    p.pump = 3.0;
    p.photon_cutoff = 1;
    const OperatorSet ops = build_full_model(p);
    CHECK_THROWS_WITH_AS(
        run_trajectory(ops, state_of(ops.all_excited_state()), 50.0, 3),
        doctest::Contains("photon_cutoff"), NumericalError);
}

TEST_CASE("rk4 norm-growth guard trips on an unstable step") {
    const OperatorSet ops = adiabatic(1, 0.0);
    EngineOptions opt;
    opt.integrator = Integrator::Rk4;
    opt.rk4_step_factor = 50.0; // deliberately far past the stability limit
    CHECK_THROWS_AS(
        run_trajectory(ops, state_of(ops.all_excited_state()), 10.0, 1, opt),
        NumericalError);
}

TEST_CASE("ensemble validation errors") {
    const OperatorSet ops = adiabatic(2, 1.0);
    EnsembleConfig cfg;
    cfg.n_trajectories = 0;
    CHECK_THROWS_AS(run_ensemble(ops, cfg), ConfigError);
    cfg.n_trajectories = 1;
    cfg.duration = 5.0;
    cfg.burn_in = 5.0;
    CHECK_THROWS_AS(run_ensemble(ops, cfg), ConfigError);
}

TEST_CASE("trajectory failures carry the trajectory index") {
    SystemParams p;
    p.n_atoms = 1;
    p.coupling = 3.0;
    p.kappa = 1.0;
    p.pump = 3.0;
    p.photon_cutoff = 1;
    const OperatorSet ops = build_full_model(p);
    EnsembleConfig cfg;
    cfg.n_trajectories = 2;
    cfg.duration = 50.0;
    cfg.burn_in = 1.0;
    cfg.master_seed = 4;
    CHECK_THROWS_WITH_AS(run_ensemble(ops, cfg), doctest::Contains("trajectory"),
                         NumericalError);
}

TEST_CASE("unnormalized initial states are rejected") {
    const OperatorSet ops = adiabatic(2, 1.0);
    Vec bad = Vec::Zero(4);
    bad(0) = 0.5;
    CHECK_THROWS_AS(run_trajectory(ops, state_of(bad), 1.0, 1), ConfigError);
}

TEST_CASE("ensembles carry full traces when requested") {
    const OperatorSet ops = adiabatic(2, 2.0);
    EnsembleConfig cfg;
    cfg.n_trajectories = 3;
    cfg.duration = 10.0;
    cfg.burn_in = 1.0;
    cfg.master_seed = 44;
    cfg.sample_stride = 0.5;
    cfg.observables = {"s", "jpjm"};
    cfg.store_traces = true;
    const EnsembleResult ens = run_ensemble(ops, cfg);
    REQUIRE(ens.traces.size() == 3);
    REQUIRE(ens.trace_times.size() == 20);
    for (const auto& per_traj : ens.traces) {
        REQUIRE(per_traj.size() == 2);
        CHECK(per_traj[0].size() == ens.trace_times.size());
    }
    // Without the flag, no trace storage.
    cfg.store_traces = false;
    CHECK(run_ensemble(ops, cfg).traces.empty());
}

TEST_CASE("sampled traces are on the stride grid and post-burn-in means agree") {
    const OperatorSet ops = adiabatic(2, 2.0);
    EngineOptions opt;
    opt.sample_stride = 0.5;
    const Engine engine(ops, opt);
    SampleSpec spec;
    spec.stride = 0.5;
    spec.burn_in = 4.0;
    spec.observables = {"s"};
    spec.store_traces = true;
    const auto res = engine.run(state_of(ops.ground_state()), 20.0,
                                derive_stream_seed(9, 0), &spec);
    REQUIRE(res.trace_times.size() == 40); // 20 / 0.5
    CHECK(res.trace_times.front() == doctest::Approx(0.5));
    CHECK(res.trace_times.back() == doctest::Approx(20.0));
    // The recomputed post-burn-in mean equals the engine's accumulation.
    double acc = 0.0;
    long n = 0;
    for (std::size_t i = 0; i < res.trace_times.size(); ++i)
        if (res.trace_times[i] >= spec.burn_in) {
            acc += res.traces[0][i];
            ++n;
        }
    CHECK(res.observable_means[0] == doctest::Approx(acc / double(n)));
    CHECK(res.observable_samples[0] == n);
}
