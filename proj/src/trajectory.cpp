#include "superrad/trajectory.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include <unsupported/Eigen/MatrixFunctions>

namespace superrad {

const char* integrator_name(Integrator i) {
    switch (i) {
        case Integrator::Auto: return "auto";
        case Integrator::Rk4: return "rk4";
        case Integrator::Spectral: return "spectral";
        case Integrator::Expm: return "expm";
    }
    return "?";
}

Integrator integrator_from_name(const std::string& name) {
    if (name == "auto") return Integrator::Auto;
    if (name == "rk4") return Integrator::Rk4;
    if (name == "spectral") return Integrator::Spectral;
    if (name == "expm") return Integrator::Expm;
    throw ConfigError("unknown integrator '" + name + "'");
}

std::size_t JumpRecord::count_events(const std::string& label, double from,
                                     double to) const {
    std::size_t n = 0;
    for (const auto& e : events)
        if (e.time >= from && e.time <= to && this->label(e) == label) ++n;
    return n;
}

// ---------------------------------------------------------------------------
// observables

namespace {

enum class ObsKind { S, P, Z2, JpJm, JppJmm, NPhot, NnPhot, SzAtom };

struct Observable {
    std::string name;
    ObsKind kind;
    int atom = 0; // 1-based, SzAtom only
};

Observable parse_observable(const std::string& name, const OperatorSet& ops) {
    auto make = [&](ObsKind k) { return Observable{name, k, 0}; };
    if (name == "s") return make(ObsKind::S);
    if (name == "p") return make(ObsKind::P);
    if (name == "z2") return make(ObsKind::Z2);
    if (name == "jpjm") return make(ObsKind::JpJm);
    if (name == "jppjmm") return make(ObsKind::JppJmm);
    if (name == "n_phot" || name == "nn_phot") {
        if (ops.model != ModelTag::Full)
            throw ConfigError("observable '" + name + "' needs the full model");
        return make(name == "n_phot" ? ObsKind::NPhot : ObsKind::NnPhot);
    }
    if (name.rfind("sz_", 0) == 0) {
        int atom = 0;
        try {
            atom = std::stoi(name.substr(3));
        } catch (const std::exception&) {
            throw ConfigError("observable '" + name + "': bad atom index");
        }
        if (atom < 1 || atom > ops.params.n_atoms)
            throw ConfigError("observable '" + name + "': atom index out of range");
        return Observable{name, ObsKind::SzAtom, atom};
    }
    throw ConfigError("unknown observable '" + name + "'");
}

// Cheap diagonals over the fixed basis ordering.
struct DiagCache {
    RealVec jz;       // eigenvalue of J_z per basis state
    RealVec n_exc;    // number of excited atoms
    RealVec fock;     // photon number (full model)
    std::vector<RealVec> sz_atom; // lazily filled per requested atom
};

DiagCache build_diag_cache(const OperatorSet& ops) {
    DiagCache d;
    const Eigen::Index dim = ops.dimension;
    const Eigen::Index fdim = ops.fock_dim();
    const int n = ops.params.n_atoms;
    d.jz.resize(dim);
    d.n_exc.resize(dim);
    d.fock.resize(dim);
    d.sz_atom.resize(n);
    for (Eigen::Index i = 0; i < dim; ++i) {
        const Eigen::Index a = i / fdim;
        const int exc = std::popcount(static_cast<uint64_t>(a));
        d.n_exc(i) = exc;
        d.jz(i) = exc - 0.5 * n;
        d.fock(i) = static_cast<double>(i % fdim);
    }
    return d;
}

const RealVec& sz_atom_diag(DiagCache& d, const OperatorSet& ops, int atom) {
    RealVec& v = d.sz_atom[atom - 1];
    if (v.size() == 0) {
        const Eigen::Index dim = ops.dimension;
        const Eigen::Index fdim = ops.fock_dim();
        const Eigen::Index bit = Eigen::Index(1) << (atom - 1);
        v.resize(dim);
        for (Eigen::Index i = 0; i < dim; ++i)
            v(i) = ((i / fdim) & bit) ? 1.0 : -1.0;
    }
    return v;
}

double diag_expectation(const RealVec& diag, const Vec& psi) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < psi.size(); ++i)
        acc += diag(i) * std::norm(psi(i));
    return acc;
}

} // namespace

// ---------------------------------------------------------------------------
// no-jump propagation backends

namespace {

struct Flight {
    virtual ~Flight() = default;
};

struct AdvanceResult {
    bool crossed = false;
    double t = 0.0; // current time after the call (crossing time if crossed)
};

// Contract: begin() opens an inter-jump interval at normalized psi;
// advance() moves the flight to min(t_stop, survival crossing of r) with the
// crossing refined to relative tolerance 1e-9; current_state() returns the
// normalized state at the flight's current time.
class Backend {
  public:
    virtual ~Backend() = default;
    virtual std::unique_ptr<Flight> begin(const Vec& psi, double t0) const = 0;
    virtual AdvanceResult advance(Flight& f, double t_stop, double r) const = 0;
    virtual void current_state(const Flight& f, Vec& out) const = 0;
};

constexpr double kBisectRelTol = 1e-9;

// --- rk4 -------------------------------------------------------------------

struct Rk4Flight : Flight {
    Vec psi;      // normalized after every step
    double survival = 1.0;
    double t = 0.0;
    Vec k1, k2, k3, k4, tmp, snap; // scratch
};

class Rk4Backend : public Backend {
  public:
    Rk4Backend(SpMat heff_action, double step)
        : action_(std::move(heff_action)), h_(step) {}

    double step() const { return h_; }

    std::unique_ptr<Flight> begin(const Vec& psi, double t0) const override {
        auto f = std::make_unique<Rk4Flight>();
        f->psi = psi;
        f->t = t0;
        const Eigen::Index d = psi.size();
        for (Vec* v : {&f->k1, &f->k2, &f->k3, &f->k4, &f->tmp, &f->snap})
            v->resize(d);
        return f;
    }

    AdvanceResult advance(Flight& fl, double t_stop, double r) const override {
        auto& f = static_cast<Rk4Flight&>(fl);
        while (f.t < t_stop - 1e-15 * std::max(1.0, std::abs(t_stop))) {
            const double h = std::min(h_, t_stop - f.t);
            f.snap = f.psi;
            const double ratio = step_once(f, f.psi, h);
            const double survival_after = f.survival * ratio;
            if (survival_after <= r) {
                refine_crossing(f, h, r);
                return {true, f.t};
            }
            f.survival = survival_after;
            f.psi /= std::sqrt(ratio);
            f.t += h;
        }
        f.t = t_stop;
        return {false, f.t};
    }

    void current_state(const Flight& fl, Vec& out) const override {
        const auto& f = static_cast<const Rk4Flight&>(fl);
        out = f.psi.normalized();
    }

  private:
    // One classical RK4 step of dpsi/dt = A psi, in place; returns the
    // squared-norm ratio of the step.  Throws if the norm grew beyond the
    // per-step drift tolerance (the evolution is contractive by design).
    double step_once(Rk4Flight& f, Vec& psi, double h) const {
        f.k1.noalias() = action_ * psi;
        f.tmp = psi + (0.5 * h) * f.k1;
        f.k2.noalias() = action_ * f.tmp;
        f.tmp = psi + (0.5 * h) * f.k2;
        f.k3.noalias() = action_ * f.tmp;
        f.tmp = psi + h * f.k3;
        f.k4.noalias() = action_ * f.tmp;
        psi += (h / 6.0) * (f.k1 + 2.0 * f.k2 + 2.0 * f.k3 + f.k4);
        const double ratio = psi.squaredNorm();
        if (ratio > 1.0 + 1e-9)
            throw NumericalError(
                "rk4 integrator instability: squared norm grew by " +
                std::to_string(ratio - 1.0) + " in one step");
        return ratio;
    }

    // Bisect the crossing inside the step that was about to start at
    // f.snap / f.survival / f.t; leaves the flight at the crossing.
    void refine_crossing(Rk4Flight& f, double h, double r) const {
        double lo = 0.0, hi = h;
        // survival(tau) = f.survival * ||step(snap, tau)||^2, monotone down.
        Vec probe = f.snap;
        for (int it = 0; it < 80; ++it) {
            if (hi - lo <= kBisectRelTol * hi) break;
            const double mid = 0.5 * (lo + hi);
            probe = f.snap;
            const double ratio = step_once(f, probe, mid);
            if (f.survival * ratio <= r)
                hi = mid;
            else
                lo = mid;
        }
        probe = f.snap;
        const double ratio_hi = step_once(f, probe, hi);
        f.psi = probe / std::sqrt(ratio_hi);
        f.survival *= ratio_hi;
        f.t += hi;
    }

    SpMat action_; // -i H - (1/2) sum L^dag L
    double h_;
};

// --- spectral (adiabatic, H = 0) --------------------------------------------

struct SpectralFlight : Flight {
    double t_ref = 0.0; // interval start
    double t = 0.0;
    Eigen::VectorXd c_re, c_im, weight; // eigenbasis coefficients of psi(t_ref)
    std::vector<Eigen::Index> active;   // indices with non-negligible weight
    bool truncated = true;
    double survival = 1.0;
};

class SpectralBackend : public Backend {
  public:
    SpectralBackend(RealMat q, RealVec evals)
        : q_(std::move(q)), d_(std::move(evals)) {}

    std::unique_ptr<Flight> begin(const Vec& psi, double t0) const override {
        auto f = std::make_unique<SpectralFlight>();
        f->t_ref = f->t = t0;
        f->c_re.noalias() = q_.transpose() * psi.real();
        f->c_im.noalias() = q_.transpose() * psi.imag();
        f->weight = f->c_re.cwiseAbs2() + f->c_im.cwiseAbs2();
        const double total = f->weight.sum();
        f->active.clear();
        for (Eigen::Index i = 0; i < f->weight.size(); ++i)
            if (f->weight(i) > 1e-22 * total) f->active.push_back(i);
        f->truncated = f->active.size() < std::size_t(f->weight.size());
        return f;
    }

    AdvanceResult advance(Flight& fl, double t_stop, double r) const override {
        auto& f = static_cast<SpectralFlight&>(fl);
        if (t_stop <= f.t) return {false, f.t};
        const bool full_sum = r < 1e-12; // truncation tail could matter
        const double s_stop = survival_at(f, t_stop - f.t_ref, full_sum);
        if (s_stop > r) {
            f.t = t_stop;
            f.survival = s_stop;
            return {false, f.t};
        }
        // Bisection on the exact survival function.
        double lo = f.t - f.t_ref, hi = t_stop - f.t_ref;
        for (int it = 0; it < 200; ++it) {
            if (hi - lo <= kBisectRelTol * std::max(hi, 1e-300)) break;
            const double mid = 0.5 * (lo + hi);
            if (survival_at(f, mid, full_sum) <= r)
                hi = mid;
            else
                lo = mid;
        }
        f.t = f.t_ref + hi;
        f.survival = survival_at(f, hi, full_sum);
        return {true, f.t};
    }

    void current_state(const Flight& fl, Vec& out) const override {
        const auto& f = static_cast<const SpectralFlight&>(fl);
        const double tau = f.t - f.t_ref;
        const Eigen::VectorXd decay = (-0.5 * tau * d_.array()).exp();
        const Eigen::VectorXd re = q_ * (decay.cwiseProduct(f.c_re)).eval();
        const Eigen::VectorXd im = q_ * (decay.cwiseProduct(f.c_im)).eval();
        out.resize(re.size());
        out.real() = re;
        out.imag() = im;
        out.normalize();
    }

  private:
    double survival_at(const SpectralFlight& f, double tau, bool full_sum) const {
        double acc = 0.0;
        if (full_sum || !f.truncated) {
            for (Eigen::Index i = 0; i < d_.size(); ++i)
                acc += f.weight(i) * std::exp(-d_(i) * tau);
        } else {
            for (const Eigen::Index i : f.active)
                acc += f.weight(i) * std::exp(-d_(i) * tau);
        }
        return acc;
    }

    RealMat q_;  // orthogonal eigenvectors of K = sum L^dag L
    RealVec d_;  // eigenvalues (>= 0); no-jump factor is exp(-K tau / 2)
};

// --- expm (dyadic lattice of exact propagators) ------------------------------

constexpr int kExpmLevels = 61; // step of level j is delta * 2^-j
constexpr int64_t kUnitsPerSegment = int64_t(1) << (kExpmLevels - 1);

struct ExpmFlight : Flight {
    Vec psi; // unnormalized; squared norm = survival since interval start
    double t0 = 0.0;
    int64_t seg = 0;
    int64_t off = 0; // lattice units into the current segment
    Vec tmp;
};

class ExpmBackend : public Backend {
  public:
    ExpmBackend(const DenseMat& heff, double delta) : delta_(delta) {
        unit_ = delta_ * std::ldexp(1.0, -(kExpmLevels - 1));
        levels_.resize(kExpmLevels);
        // Each level is evaluated directly: squaring a near-identity deep
        // level upward would amplify the rounding of its tiny increment by
        // 2^60 and lose the evolution entirely.
        const Complex mi(0.0, -1.0);
        for (int j = 0; j < kExpmLevels; ++j) {
            const double tau = delta_ * std::ldexp(1.0, -j);
            levels_[j] = (mi * tau * heff).exp();
        }
    }

    std::unique_ptr<Flight> begin(const Vec& psi, double t0) const override {
        auto f = std::make_unique<ExpmFlight>();
        f->psi = psi;
        f->t0 = t0;
        f->tmp.resize(psi.size());
        return f;
    }

    double time_of(const ExpmFlight& f) const {
        return f.t0 + double(f.seg) * delta_ + double(f.off) * unit_;
    }

    AdvanceResult advance(Flight& fl, double t_stop, double r) const override {
        auto& f = static_cast<ExpmFlight&>(fl);
        // Ties within rounding count as crossings: near the crossing the
        // deepest levels no longer change the survival at fp resolution,
        // and a strict comparison could walk in unresolvable steps.  The
        // induced jump-time error is ~1e-12 in survival, far inside the
        // refinement tolerance.
        const double r_eff = r * (1.0 + 1e-12);
        while (true) {
            const double t_cur = time_of(f);
            if (t_cur >= t_stop - 0.25 * unit_) return {false, t_cur};
            // Units to the stop, capped at the current segment boundary so
            // the count stays in range.
            const int64_t to_stop = std::llround(
                std::min((t_stop - t_cur) / unit_, double(kUnitsPerSegment)));
            if (to_stop <= 0) return {false, t_cur};
            const int64_t in_segment = kUnitsPerSegment - f.off;
            if (in_segment <= 0) { // segment boundary
                f.seg += 1;
                f.off = 0;
                continue;
            }
            const int64_t n = std::min(to_stop, in_segment);
            // Walk the binary digits of n from the top: each set bit is one
            // tentative step.  A step that crosses the threshold switches to
            // refinement over the remaining levels, so the whole span costs
            // at most kExpmLevels applications.
            bool crossed = false;
            for (int bit = 63 - std::countl_zero(uint64_t(n)); bit >= 0; --bit) {
                if (!(n & (int64_t(1) << bit))) continue;
                const int level = kExpmLevels - 1 - bit;
                if (!try_step(f, level, r_eff)) {
                    refine_crossing(f, level + 1, r_eff);
                    crossed = true;
                    break;
                }
            }
            if (crossed) return {true, time_of(f)};
            if (f.off == kUnitsPerSegment) {
                f.seg += 1;
                f.off = 0;
            }
        }
    }

    void current_state(const Flight& fl, Vec& out) const override {
        const auto& f = static_cast<const ExpmFlight&>(fl);
        out = f.psi.normalized();
    }

  private:
    // Applies one step of the given level if it stays above the threshold;
    // returns false (flight unchanged) when the step crosses.
    bool try_step(ExpmFlight& f, int level, double r_eff) const {
        f.tmp.noalias() = levels_[level] * f.psi;
        if (f.tmp.squaredNorm() <= r_eff) return false;
        f.psi.swap(f.tmp);
        f.off += int64_t(1) << (kExpmLevels - 1 - level);
        return true;
    }

    // The crossing lies within one step of level-1; locate it to lattice
    // resolution by the dyadic digit walk and commit the crossing unit.
    void refine_crossing(ExpmFlight& f, int from_level, double r_eff) const {
        for (int level = from_level; level < kExpmLevels; ++level)
            try_step(f, level, r_eff);
        f.tmp.noalias() = levels_[kExpmLevels - 1] * f.psi;
        f.psi.swap(f.tmp);
        f.off += 1;
    }

    std::vector<DenseMat> levels_;
    double delta_;
    double unit_;
};

} // namespace

// ---------------------------------------------------------------------------
// engine

struct Engine::Impl {
    OperatorSet ops;
    EngineOptions opt;
    Integrator backend_kind = Integrator::Rk4;
    std::unique_ptr<Backend> backend;
    double rk4_h = 0.0;
    double rate_bound = 0.0;
    SpMat k_total;      // sum_k L^dag L
    SpMat heff_action;  // -i H - K/2
    mutable DiagCache diag;
    double lattice_delta = 0.5;

    Impl(const OperatorSet& o, const EngineOptions& options)
        : ops(o), opt(options) {
        build_plan();
        diag = build_diag_cache(ops);
        // Prime per-atom diagonals so concurrent run() calls never mutate.
        for (int j = 1; j <= ops.params.n_atoms; ++j) sz_atom_diag(diag, ops, j);
    }

    void build_plan() {
        const Eigen::Index dim = ops.dimension;
        if (ops.jump_channels.empty())
            throw ConfigError("operator set has no jump channels");
        k_total = SpMat(dim, dim);
        for (const auto& ch : ops.jump_channels)
            k_total = k_total + SpMat(ch.op.adjoint() * ch.op);
        k_total.makeCompressed();

        rate_bound = spectral_bound(k_total);
        const double h_scale =
            std::max(rate_bound, spectral_bound(ops.h_coherent));
        rk4_h = h_scale > 0 ? opt.rk4_step_factor / h_scale : 1e-2;

        heff_action = SpMat(Complex(0, -1) * ops.h_coherent) +
                      SpMat(Complex(-0.5) * k_total);
        heff_action.makeCompressed();

        lattice_delta = opt.sample_stride > 0 ? opt.sample_stride : 0.5;

        backend_kind = opt.integrator;
        if (backend_kind == Integrator::Auto) {
            if (is_pure_damping() && dim <= opt.spectral_max_dim)
                backend_kind = Integrator::Spectral;
            else if (dim <= opt.expm_max_dim)
                backend_kind = Integrator::Expm;
            else
                backend_kind = Integrator::Rk4;
        }
        switch (backend_kind) {
            case Integrator::Rk4:
                backend = std::make_unique<Rk4Backend>(heff_action, rk4_h);
                break;
            case Integrator::Spectral: {
                if (!is_pure_damping())
                    throw ConfigError("spectral integrator requires H = 0 and a "
                                      "real symmetric damping matrix "
                                      "(adiabatic model)");
                if (dim > opt.spectral_max_dim)
                    throw CapacityError("dimension exceeds spectral_max_dim");
                RealMat k_dense(dim, dim);
                k_dense = DenseMat(k_total).real();
                Eigen::SelfAdjointEigenSolver<RealMat> es(k_dense);
                if (es.info() != Eigen::Success)
                    throw NumericalError("eigendecomposition of the damping "
                                         "matrix failed");
                RealVec evals = es.eigenvalues().cwiseMax(0.0);
                backend = std::make_unique<SpectralBackend>(es.eigenvectors(),
                                                            std::move(evals));
                break;
            }
            case Integrator::Expm: {
                if (dim > opt.expm_max_dim)
                    throw CapacityError("dimension exceeds expm_max_dim");
                DenseMat heff = DenseMat(ops.h_coherent) +
                                Complex(0, -0.5) * DenseMat(k_total);
                backend = std::make_unique<ExpmBackend>(heff, lattice_delta);
                break;
            }
            case Integrator::Auto:
                throw ConsistencyError("unresolved integrator");
        }
    }

    bool is_pure_damping() const {
        for (int k = 0; k < ops.h_coherent.outerSize(); ++k)
            for (SpMat::InnerIterator it(ops.h_coherent, k); it; ++it)
                if (std::abs(it.value()) > 0) return false;
        // K must be real symmetric for the orthogonal eigen route.
        for (int k = 0; k < k_total.outerSize(); ++k)
            for (SpMat::InnerIterator it(k_total, k); it; ++it)
                if (std::abs(it.value().imag()) > 1e-12) return false;
        return true;
    }

    // Largest eigenvalue estimate of a Hermitian sparse matrix by power
    // iteration with a deterministic start vector.
    double spectral_bound(const SpMat& m) const {
        if (m.nonZeros() == 0) return 0.0;
        Vec v(m.rows());
        for (Eigen::Index i = 0; i < v.size(); ++i)
            v(i) = Complex(std::cos(0.37 * double(i) + 0.2),
                           std::sin(0.73 * double(i) + 0.4));
        v.normalize();
        double lambda = 0.0;
        Vec w(v.size());
        for (int it = 0; it < 60; ++it) {
            w.noalias() = m * v;
            const double nw = w.norm();
            if (nw == 0.0) return 0.0;
            lambda = nw;
            v = w / nw;
        }
        return 1.1 * lambda; // safety factor over the power-iteration estimate
    }

    double top_fock_population(const Vec& psi) const {
        const Eigen::Index fdim = ops.fock_dim();
        double acc = 0.0;
        for (Eigen::Index i = fdim - 1; i < psi.size(); i += fdim)
            acc += std::norm(psi(i));
        return acc;
    }
};

Engine::Engine(const OperatorSet& ops, const EngineOptions& opt)
    : impl_(std::make_unique<Impl>(ops, opt)) {}
Engine::~Engine() = default;

Integrator Engine::integrator() const { return impl_->backend_kind; }
double Engine::rk4_step() const { return impl_->rk4_h; }
const OperatorSet& Engine::ops() const { return impl_->ops; }

TrajectoryResult Engine::run(const StateVector& init, double duration,
                             uint64_t seed, const SampleSpec* sampling) const {
    const Impl& im = *impl_;
    if (duration <= 0) throw ConfigError("duration must be > 0");
    if (init.amplitudes.size() != im.ops.dimension)
        throw ConfigError("initial state dimension mismatch");
    const double init_norm = init.amplitudes.norm();
    if (std::abs(init_norm - 1.0) > 1e-6)
        throw ConfigError("initial state is not normalized");

    TrajectoryResult out;
    JumpRecord& rec = out.record;
    rec.total_time = init.time + duration;
    rec.seed = seed;
    rec.model_tag = im.ops.model;
    rec.params = im.ops.params;
    rec.burn_in = sampling ? sampling->burn_in : 0.0;
    for (const auto& ch : im.ops.jump_channels)
        rec.channel_labels.push_back(ch.label);

    std::vector<Observable> observables;
    if (sampling)
        for (const auto& name : sampling->observables)
            observables.push_back(parse_observable(name, im.ops));
    out.observable_means.assign(observables.size(), 0.0);
    out.observable_samples.assign(observables.size(), 0);
    if (sampling && sampling->store_traces)
        out.traces.resize(observables.size());

    CounterRng rng(seed);
    Vec psi = init.amplitudes / init_norm;
    Vec scratch(psi.size()), jm_psi(psi.size());
    double threshold = rng.threshold();
    auto flight = im.backend->begin(psi, init.time);
    double t = init.time;
    const double t_end = init.time + duration;
    const double stride = sampling && sampling->stride > 0
                              ? sampling->stride
                              : im.lattice_delta;
    long sample_index = 1;

    const bool full_model = im.ops.model == ModelTag::Full;
    auto check_cutoff = [&](const Vec& state, double when) {
        if (!full_model) return;
        const double pop = im.top_fock_population(state);
        if (pop > im.opt.top_fock_tolerance)
            throw NumericalError(
                "photon cutoff too small: top Fock population " +
                std::to_string(pop) + " at t = " + std::to_string(when) +
                " exceeds " + std::to_string(im.opt.top_fock_tolerance) +
                "; rerun with a larger photon_cutoff");
    };

    auto sample_state = [&](const Vec& state, double when) {
        for (std::size_t i = 0; i < observables.size(); ++i) {
            const Observable& ob = observables[i];
            double val = 0.0;
            const int n = im.ops.params.n_atoms;
            switch (ob.kind) {
                case ObsKind::S:
                    val = 2.0 / n * diag_expectation(im.diag.jz, state);
                    break;
                case ObsKind::P: {
                    jm_psi.noalias() = im.ops.j_minus * state;
                    const double jpjm = jm_psi.squaredNorm();
                    const double exc = diag_expectation(im.diag.n_exc, state);
                    val = n > 1 ? (jpjm - exc) / (double(n) * (n - 1.0)) : 0.0;
                    break;
                }
                case ObsKind::Z2: {
                    double jz2 = 0.0;
                    for (Eigen::Index k = 0; k < state.size(); ++k)
                        jz2 += im.diag.jz(k) * im.diag.jz(k) * std::norm(state(k));
                    val = n > 1 ? (4.0 * jz2 - n) / (double(n) * (n - 1.0)) : 0.0;
                    break;
                }
                case ObsKind::JpJm:
                    jm_psi.noalias() = im.ops.j_minus * state;
                    val = jm_psi.squaredNorm();
                    break;
                case ObsKind::JppJmm:
                    jm_psi.noalias() = im.ops.j_minus * state;
                    scratch.noalias() = im.ops.j_minus * jm_psi;
                    val = scratch.squaredNorm();
                    break;
                case ObsKind::NPhot:
                    val = diag_expectation(im.diag.fock, state);
                    break;
                case ObsKind::NnPhot: {
                    double acc = 0.0;
                    for (Eigen::Index k = 0; k < state.size(); ++k) {
                        const double nk = im.diag.fock(k);
                        acc += nk * (nk - 1.0) * std::norm(state(k));
                    }
                    val = acc;
                    break;
                }
                case ObsKind::SzAtom:
                    val = diag_expectation(im.diag.sz_atom[ob.atom - 1], state);
                    break;
            }
            if (when >= rec.burn_in + init.time) {
                out.observable_means[i] += val;
                out.observable_samples[i] += 1;
            }
            if (sampling->store_traces) out.traces[i].push_back(val);
        }
        if (sampling->store_traces) out.trace_times.push_back(when);
    };

    Vec sample_buf(psi.size());
    double last_event_time = -std::numeric_limits<double>::infinity();
    while (true) {
        const double next_sample =
            sampling ? init.time + stride * double(sample_index)
                     : std::numeric_limits<double>::infinity();
        const double t_stop = std::min(t_end, next_sample);
        const AdvanceResult res = im.backend->advance(*flight, t_stop, threshold);
        t = res.t;
        if (res.crossed) {
            im.backend->current_state(*flight, psi); // pre-jump state
            // Channel weights ||L_k psi||^2 on the normalized state.
            double total = 0.0;
            std::vector<double> cum(im.ops.jump_channels.size());
            for (std::size_t k = 0; k < im.ops.jump_channels.size(); ++k) {
                scratch.noalias() = im.ops.jump_channels[k].op * psi;
                total += scratch.squaredNorm();
                cum[k] = total;
            }
            if (!(total > 0) || !std::isfinite(total))
                throw ConsistencyError(
                    "zero total jump weight at a jump event (t = " +
                    std::to_string(t) + ")");
            const double pick = rng.uniform() * total;
            std::size_t k = 0;
            while (k + 1 < cum.size() && cum[k] <= pick) ++k;
            scratch.noalias() = im.ops.jump_channels[k].op * psi;
            const double nrm = scratch.norm();
            if (!(nrm > 0))
                throw ConsistencyError("selected jump channel annihilates the state");
            psi = scratch / nrm;
            double t_event = t;
            if (t_event <= last_event_time) // lattice tie-break, keep times strict
                t_event = std::nextafter(last_event_time,
                                         std::numeric_limits<double>::infinity());
            last_event_time = t_event;
            rec.events.push_back({t_event, uint32_t(k)});
            check_cutoff(psi, t_event);
            threshold = rng.threshold();
            flight = im.backend->begin(psi, t_event);
            continue;
        }
        if (sampling && t >= next_sample - 1e-12 * std::max(1.0, next_sample) &&
            next_sample <= t_end) {
            im.backend->current_state(*flight, sample_buf);
            sample_state(sample_buf, next_sample);
            check_cutoff(sample_buf, next_sample);
            ++sample_index;
            if (t < t_end) continue;
        }
        if (t >= t_end - 1e-12 * std::max(1.0, t_end)) break;
    }

    im.backend->current_state(*flight, psi);
    check_cutoff(psi, t_end);
    out.final_state.amplitudes = psi;
    out.final_state.time = t_end;
    for (std::size_t i = 0; i < observables.size(); ++i)
        if (out.observable_samples[i] > 0)
            out.observable_means[i] /= double(out.observable_samples[i]);
    return out;
}

std::pair<JumpRecord, StateVector> run_trajectory(const OperatorSet& ops,
                                                  const StateVector& init,
                                                  double duration, uint64_t seed,
                                                  const EngineOptions& opt) {
    Engine engine(ops, opt);
    TrajectoryResult res = engine.run(init, duration, seed, nullptr);
    return {std::move(res.record), std::move(res.final_state)};
}

// ---------------------------------------------------------------------------
// ensembles

const ObservableStats& EnsembleResult::observable(const std::string& name) const {
    for (const auto& o : observables)
        if (o.name == name) return o;
    throw ConfigError("ensemble has no observable '" + name + "'");
}

bool EnsembleResult::has_observable(const std::string& name) const {
    for (const auto& o : observables)
        if (o.name == name) return true;
    return false;
}

EnsembleResult run_ensemble(const OperatorSet& ops, const EnsembleConfig& cfg) {
    if (cfg.n_trajectories < 1)
        throw ConfigError("n_trajectories must be >= 1");
    if (cfg.burn_in >= cfg.duration)
        throw ConfigError("burn_in must be smaller than duration");

    EngineOptions eopt = cfg.engine;
    if (eopt.sample_stride <= 0) eopt.sample_stride = cfg.sample_stride;
    const Engine engine(ops, eopt);

    StateVector init;
    if (cfg.initial_state) {
        init = *cfg.initial_state;
    } else {
        init.amplitudes = engine.ops().ground_state();
        init.time = 0.0;
    }
    SampleSpec spec;
    spec.stride = cfg.sample_stride;
    spec.burn_in = cfg.burn_in;
    spec.observables = cfg.observables;
    spec.store_traces = cfg.store_traces;

    std::vector<TrajectoryResult> results(cfg.n_trajectories);
    struct Failure {
        int index;
        std::string what;
        int kind; // 0 config, 1 capacity, 2 numerical, 3 other
    };
    std::vector<Failure> failures;
    std::mutex failures_mutex;

    int n_threads = cfg.threads > 0
                        ? cfg.threads
                        : int(std::max(1u, std::thread::hardware_concurrency()));
    n_threads = std::min(n_threads, cfg.n_trajectories);

    std::atomic<int> next{0};
    auto worker = [&]() {
        while (true) {
            const int i = next.fetch_add(1);
            if (i >= cfg.n_trajectories) return;
            try {
                const uint64_t seed = derive_stream_seed(cfg.master_seed, i);
                results[i] = engine.run(init, cfg.duration, seed, &spec);
            } catch (const ConfigError& e) {
                std::lock_guard lock(failures_mutex);
                failures.push_back({i, e.what(), 0});
            } catch (const CapacityError& e) {
                std::lock_guard lock(failures_mutex);
                failures.push_back({i, e.what(), 1});
            } catch (const NumericalError& e) {
                std::lock_guard lock(failures_mutex);
                failures.push_back({i, e.what(), 2});
            } catch (const std::exception& e) {
                std::lock_guard lock(failures_mutex);
                failures.push_back({i, e.what(), 3});
            }
        }
    };
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(n_threads);
        for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (!failures.empty()) {
        auto worst = std::min_element(
            failures.begin(), failures.end(),
            [](const Failure& a, const Failure& b) { return a.index < b.index; });
        const std::string msg =
            "trajectory " + std::to_string(worst->index) + ": " + worst->what;
        switch (worst->kind) {
            case 0: throw ConfigError(msg);
            case 1: throw CapacityError(msg);
            case 2: throw NumericalError(msg);
            default: throw std::runtime_error(msg);
        }
    }

    EnsembleResult out;
    out.master_seed = cfg.master_seed;
    out.n_trajectories = cfg.n_trajectories;
    out.burn_in = cfg.burn_in;
    out.duration = cfg.duration;
    out.records.reserve(cfg.n_trajectories);
    for (auto& r : results) out.records.push_back(std::move(r.record));
    if (cfg.store_traces) {
        out.traces.reserve(cfg.n_trajectories);
        for (auto& r : results) out.traces.push_back(std::move(r.traces));
        if (!results.empty()) out.trace_times = std::move(results[0].trace_times);
    }

    for (std::size_t k = 0; k < cfg.observables.size(); ++k) {
        ObservableStats st;
        st.name = cfg.observables[k];
        st.per_trajectory_mean.reserve(cfg.n_trajectories);
        for (const auto& r : results) {
            st.per_trajectory_mean.push_back(r.observable_means[k]);
            st.per_trajectory_samples.push_back(r.observable_samples[k]);
        }
        double sum = 0.0;
        for (double v : st.per_trajectory_mean) sum += v;
        st.mean = sum / double(cfg.n_trajectories);
        if (cfg.n_trajectories > 1) {
            double ss = 0.0;
            for (double v : st.per_trajectory_mean)
                ss += (v - st.mean) * (v - st.mean);
            st.std_error = std::sqrt(ss / (double(cfg.n_trajectories) - 1.0) /
                                     double(cfg.n_trajectories));
        }
        out.observables.push_back(std::move(st));
    }
    return out;
}

RateEstimate cavity_rate(const EnsembleResult& ensemble) {
    std::vector<double> rates;
    rates.reserve(ensemble.records.size());
    for (const auto& rec : ensemble.records) {
        const double window = rec.total_time - ensemble.burn_in;
        rates.push_back(
            double(rec.count_events("cavity", ensemble.burn_in, rec.total_time)) /
            window);
    }
    RateEstimate est;
    for (double r : rates) est.mean += r;
    est.mean /= double(rates.size());
    if (rates.size() > 1) {
        double ss = 0.0;
        for (double r : rates) ss += (r - est.mean) * (r - est.mean);
        est.std_error =
            std::sqrt(ss / (double(rates.size()) - 1.0) / double(rates.size()));
    }
    return est;
}

// ---------------------------------------------------------------------------
// record serialization

void write_record(std::ostream& out, const JumpRecord& rec) {
    char buf[64];
    out << "#jumprecord v" << kRecordSchemaVersion << "\n";
    out << "#model " << model_name(rec.model_tag) << "\n";
    out << "#seed " << rec.seed << "\n";
    std::snprintf(buf, sizeof buf, "%.16e", rec.total_time);
    out << "#total_time " << buf << "\n";
    std::snprintf(buf, sizeof buf, "%.16e", rec.burn_in);
    out << "#burn_in " << buf << "\n";
    out << "#params n_atoms=" << rec.params.n_atoms;
    std::snprintf(buf, sizeof buf, "%.16e", rec.params.coupling);
    out << " coupling=" << buf;
    std::snprintf(buf, sizeof buf, "%.16e", rec.params.kappa);
    out << " kappa=" << buf;
    std::snprintf(buf, sizeof buf, "%.16e", rec.params.pump);
    out << " pump=" << buf;
    std::snprintf(buf, sizeof buf, "%.16e", rec.params.gamma_free);
    out << " gamma_free=" << buf;
    std::snprintf(buf, sizeof buf, "%.16e", rec.params.detuning);
    out << " detuning=" << buf;
    out << " photon_cutoff=" << rec.params.photon_cutoff << "\n";
    out << "#channels";
    for (const auto& l : rec.channel_labels) out << ' ' << l;
    out << "\n#events " << rec.events.size() << "\n";
    for (const auto& e : rec.events) {
        std::snprintf(buf, sizeof buf, "%.16e", e.time);
        out << buf << '\t' << rec.channel_labels.at(e.channel) << "\n";
    }
    out << "#end\n";
}

void write_records_file(const std::string& path,
                        const std::vector<JumpRecord>& recs) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write record file: " + path);
    for (const auto& r : recs) write_record(out, r);
}

namespace {

struct RecordParser {
    std::istream& in;
    int lineno = 0;

    bool next_line(std::string& line) {
        while (std::getline(in, line)) {
            ++lineno;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (!line.empty()) return true;
        }
        return false;
    }

    [[noreturn]] void fail(const std::string& msg) const {
        throw ConfigError("record parse error at line " +
                          std::to_string(lineno) + ": " + msg);
    }
};

} // namespace

std::vector<JumpRecord> read_records(std::istream& in) {
    std::vector<JumpRecord> out;
    RecordParser p{in};
    std::string line;
    while (p.next_line(line)) {
        if (line.rfind("#jumprecord v", 0) != 0)
            p.fail("expected '#jumprecord v<n>' header");
        if (std::stoi(line.substr(13)) != kRecordSchemaVersion)
            p.fail("unsupported record schema version");
        JumpRecord rec;
        std::size_t n_events = 0;
        bool have_events = false;
        while (p.next_line(line)) {
            if (line == "#end") p.fail("missing #events before #end");
            if (line.rfind("#model ", 0) == 0) {
                rec.model_tag = model_from_name(line.substr(7));
            } else if (line.rfind("#seed ", 0) == 0) {
                rec.seed = std::stoull(line.substr(6));
            } else if (line.rfind("#total_time ", 0) == 0) {
                rec.total_time = std::stod(line.substr(12));
            } else if (line.rfind("#burn_in ", 0) == 0) {
                rec.burn_in = std::stod(line.substr(9));
            } else if (line.rfind("#params ", 0) == 0) {
                std::istringstream ps(line.substr(8));
                std::string tok;
                while (ps >> tok) {
                    const auto eq = tok.find('=');
                    if (eq == std::string::npos) p.fail("bad params token " + tok);
                    const std::string key = tok.substr(0, eq);
                    const std::string val = tok.substr(eq + 1);
                    if (key == "n_atoms") rec.params.n_atoms = std::stoi(val);
                    else if (key == "coupling") rec.params.coupling = std::stod(val);
                    else if (key == "kappa") rec.params.kappa = std::stod(val);
                    else if (key == "pump") rec.params.pump = std::stod(val);
                    else if (key == "gamma_free") rec.params.gamma_free = std::stod(val);
                    else if (key == "detuning") rec.params.detuning = std::stod(val);
                    else if (key == "photon_cutoff") rec.params.photon_cutoff = std::stoi(val);
                    else p.fail("unknown params key " + key);
                }
            } else if (line.rfind("#channels", 0) == 0) {
                std::istringstream cs(line.substr(9));
                std::string lab;
                while (cs >> lab) rec.channel_labels.push_back(lab);
            } else if (line.rfind("#events ", 0) == 0) {
                n_events = std::stoull(line.substr(8));
                have_events = true;
                break;
            } else {
                p.fail("unknown header line '" + line + "'");
            }
        }
        if (!have_events) p.fail("record ended before #events");
        rec.events.reserve(n_events);
        double prev = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < n_events; ++i) {
            if (!p.next_line(line)) p.fail("truncated event list");
            const auto tab = line.find('\t');
            if (tab == std::string::npos) p.fail("event line missing tab");
            const double t = std::stod(line.substr(0, tab));
            const std::string lab = line.substr(tab + 1);
            const auto it = std::find(rec.channel_labels.begin(),
                                      rec.channel_labels.end(), lab);
            if (it == rec.channel_labels.end())
                p.fail("event channel '" + lab + "' not declared");
            if (!(t > prev)) p.fail("event times not strictly increasing");
            if (t < 0 || t > rec.total_time)
                p.fail("event time outside [0, total_time]");
            prev = t;
            rec.events.push_back(
                {t, uint32_t(it - rec.channel_labels.begin())});
        }
        if (!p.next_line(line) || line != "#end") p.fail("missing #end");
        out.push_back(std::move(rec));
    }
    return out;
}

std::vector<JumpRecord> read_records_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open record file: " + path);
    return read_records(in);
}

} // namespace superrad
