#include "superrad/semiclassical.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace superrad {

bool PairCorrelations::physical(double slack) const {
    return std::abs(s) <= 1 + slack && std::abs(p) <= 1 + slack &&
           std::abs(z2) <= 1 + slack;
}

double CumulantRates::norm() const {
    return std::sqrt(ds * ds + dp * dp + dz2 * dz2);
}

CumulantRates cumulant_rhs(const CumulantParams& cp, const PairCorrelations& st) {
    const double w = cp.pump, gc = cp.gamma_c;
    const double u = w + gc;
    const double n = cp.n_atoms;
    const double sp = st.s * st.p; // factorized <sz^1 sp^2 sm^3>
    CumulantRates r;
    r.ds = -u * (st.s - cp.d0()) - 2.0 * gc * (n - 1.0) * st.p;
    r.dp = -u * st.p + 0.5 * gc * (st.z2 + st.s) + gc * (n - 2.0) * sp;
    r.dz2 = -2.0 * u * (st.z2 - cp.d0() * st.s) + 4.0 * gc * (st.p - (n - 2.0) * sp);
    return r;
}

namespace {

PairCorrelations make_state(const CumulantParams& cp, double s, double p, double z2) {
    PairCorrelations st;
    st.s = s;
    st.p = p;
    st.z2 = z2;
    st.d0 = cp.d0();
    st.n_atoms = cp.n_atoms;
    st.pump = cp.pump;
    st.gamma_c = cp.gamma_c;
    st.below_threshold = cp.pump < cp.gamma_c;
    return st;
}

// One classical RK4 step of the three cumulant equations.
PairCorrelations rk4_step(const CumulantParams& cp, const PairCorrelations& st,
                          double h) {
    auto advance = [&](const PairCorrelations& base, const CumulantRates& k,
                       double f) {
        return make_state(cp, base.s + f * k.ds, base.p + f * k.dp,
                          base.z2 + f * k.dz2);
    };
    const CumulantRates k1 = cumulant_rhs(cp, st);
    const CumulantRates k2 = cumulant_rhs(cp, advance(st, k1, 0.5 * h));
    const CumulantRates k3 = cumulant_rhs(cp, advance(st, k2, 0.5 * h));
    const CumulantRates k4 = cumulant_rhs(cp, advance(st, k3, h));
    return make_state(cp,
                      st.s + h / 6.0 * (k1.ds + 2 * k2.ds + 2 * k3.ds + k4.ds),
                      st.p + h / 6.0 * (k1.dp + 2 * k2.dp + 2 * k3.dp + k4.dp),
                      st.z2 + h / 6.0 * (k1.dz2 + 2 * k2.dz2 + 2 * k3.dz2 + k4.dz2));
}

// Newton iteration on cumulant_rhs = 0 with the analytic 3x3 Jacobian.
// Returns false if it fails to keep reducing the residual.
bool newton_polish(const CumulantParams& cp, PairCorrelations& st, double floor) {
    const double w = cp.pump, gc = cp.gamma_c, u = w + gc;
    const double n = cp.n_atoms;
    for (int it = 0; it < 50; ++it) {
        const CumulantRates r = cumulant_rhs(cp, st);
        if (r.norm() <= floor) return true;
        const double j00 = -u, j01 = -2.0 * gc * (n - 1.0), j02 = 0.0;
        const double j10 = 0.5 * gc + gc * (n - 2.0) * st.p;
        const double j11 = -u + gc * (n - 2.0) * st.s;
        const double j12 = 0.5 * gc;
        const double j20 = 2.0 * u * cp.d0() - 4.0 * gc * (n - 2.0) * st.p;
        const double j21 = 4.0 * gc * (1.0 - (n - 2.0) * st.s);
        const double j22 = -2.0 * u;
        // Solve J * delta = -r by cofactor expansion.
        const double det = j00 * (j11 * j22 - j12 * j21) -
                           j01 * (j10 * j22 - j12 * j20) +
                           j02 * (j10 * j21 - j11 * j20);
        if (det == 0.0 || !std::isfinite(det)) return false;
        const double b0 = -r.ds, b1 = -r.dp, b2 = -r.dz2;
        const double d0 = b0 * (j11 * j22 - j12 * j21) -
                          j01 * (b1 * j22 - j12 * b2) +
                          j02 * (b1 * j21 - j11 * b2);
        const double d1 = j00 * (b1 * j22 - j12 * b2) -
                          b0 * (j10 * j22 - j12 * j20) +
                          j02 * (j10 * b2 - b1 * j20);
        const double d2 = j00 * (j11 * b2 - b1 * j21) -
                          j01 * (j10 * b2 - b1 * j20) +
                          b0 * (j10 * j21 - j11 * j20);
        st = make_state(cp, st.s + d0 / det, st.p + d1 / det, st.z2 + d2 / det);
    }
    return cumulant_rhs(cp, st).norm() <= floor;
}

} // namespace

PairCorrelations uncorrelated_state(const CumulantParams& cp) {
    const double d0 = cp.d0();
    return make_state(cp, d0, 0.0, d0 * d0);
}

PairCorrelations integrate_to_steady_state(const CumulantParams& cp,
                                           const PairCorrelations& init,
                                           double tolerance) {
    if (cp.n_atoms < 1) throw ConfigError("cumulant equations require N >= 1");
    if (cp.gamma_c <= 0) throw ConfigError("cumulant equations require Gamma_c > 0");
    if (tolerance <= 0) throw ConfigError("tolerance must be > 0");
    const double u = cp.pump + cp.gamma_c;
    // Fastest local rate: relaxation u plus the collective coupling scale.
    const double fast = u + 2.0 * cp.gamma_c * cp.n_atoms;
    double h = 0.2 / fast;
    PairCorrelations st = init;
    st = make_state(cp, st.s, st.p, st.z2);

    const double target = tolerance * u;
    const long max_steps = 4'000'000;
    double best = cumulant_rhs(cp, st).norm();
    for (long step = 0; step < max_steps; ++step) {
        const PairCorrelations next = rk4_step(cp, st, h);
        if (!next.physical(0.5) || !std::isfinite(next.s + next.p + next.z2)) {
            h *= 0.5; // halve on a wild step and retry
            if (h < 1e-12 / fast)
                throw NumericalError("cumulant integration unstable");
            continue;
        }
        st = next;
        const double res = cumulant_rhs(cp, st).norm();
        if (res <= target) break;
        if (step == max_steps - 1) {
            std::ostringstream msg;
            msg << "cumulant integration did not reach tolerance; last state "
                << "(s,p,z2)=(" << st.s << "," << st.p << "," << st.z2
                << ") residual " << res;
            throw NumericalError(msg.str());
        }
        best = std::min(best, res);
    }
    // Polish the fixed point of the same RHS; keeps the route independent of
    // the closed-form algebra while removing the time-stepping tail.
    PairCorrelations polished = st;
    if (newton_polish(cp, polished, 1e-13 * u) ||
        cumulant_rhs(cp, polished).norm() < cumulant_rhs(cp, st).norm())
        st = polished;
    return st;
}

PairCorrelations integrate_to_steady_state(const CumulantParams& cp,
                                           double tolerance) {
    return integrate_to_steady_state(cp, uncorrelated_state(cp), tolerance);
}

PairCorrelations closed_form_steady_state(const CumulantParams& cp) {
    const double w = cp.pump, gc = cp.gamma_c;
    const double n = cp.n_atoms;
    if (cp.n_atoms < 3)
        throw ConfigError("closed-form steady state divides by (N-1)(N-2); "
                          "needs N >= 3 (use the dense reference solver below that)");
    if (gc <= 0) throw ConfigError("closed form requires Gamma_c > 0");
    if (w <= 0)
        throw ConfigError("closed-form steady state requires w > 0 "
                          "(the p-equation degenerates at w = 0)");

    // In units of Gamma_c, p solves
    //   2 (N-1)(N-2) p^2 + beta p - (x-1) = 0,
    //   beta = x^2 - (N-5) x + (3N-2),  x = w/Gamma_c,
    // which is the printed root rearranged; the physical branch is the one
    // continuous in x with p(1) = 0.
    const double x = w / gc;
    const double a2 = 2.0 * (n - 1.0) * (n - 2.0);
    const double beta = x * x - (n - 5.0) * x + (3.0 * n - 2.0);
    const double c0 = -(x - 1.0);
    const double disc = beta * beta - 4.0 * a2 * c0;
    if (disc < 0)
        throw NumericalError("closed form: negative discriminant");
    const double root = std::sqrt(disc);
    // p = (-beta + root)/(2 a2), evaluated without cancellation.
    const double p = beta >= 0 ? -2.0 * c0 / (beta + root)
                               : (-beta + root) / (2.0 * a2);

    const double u = w + gc;
    const double d0 = cp.d0();
    const double s = d0 - 2.0 * gc * (n - 1.0) / u * p;
    const double z2 = d0 * d0 +
                      2.0 * gc / (u * u) *
                          (u * (1.0 - d0 * (2.0 * n - 3.0)) +
                           2.0 * (n - 1.0) * (n - 2.0) * gc * p) *
                          p;
    return make_state(cp, s, p, z2);
}

double collective_intensity(const PairCorrelations& c) {
    const double n = c.n_atoms;
    return n * (c.s + 1.0) / 2.0 + n * (n - 1.0) * c.p;
}

double g2_zero_semiclassical(const PairCorrelations& c, DiagonalTerm term) {
    const double n = c.n_atoms;
    const double den = collective_intensity(c);
    if (den == 0.0) return std::numeric_limits<double>::quiet_NaN();
    const double diag = term == DiagonalTerm::LadderExact
                            ? 0.5 * (1.0 + 2.0 * c.s + c.z2)
                            : 0.5 * (1.0 + c.z2 + 2.0 * c.s * c.s);
    const double num =
        n * (n - 1.0) *
        (2.0 * (n - 2.0) * (c.s + 1.0) * c.p + diag +
         (n - 2.0) * (n - 3.0) * c.p * c.p);
    return num / (den * den);
}

double thermal_g2(double tau, double pump) {
    if (pump <= 0) throw ConfigError("thermal_g2 requires w > 0");
    return 1.0 + std::exp(-tau * pump / std::numbers::pi);
}

double thermal_g2_zero(int n_atoms) {
    return 2.0 * (1.0 - 1.0 / double(n_atoms));
}

std::vector<SweepRow> sweep_closed_form(int n_atoms,
                                        const std::vector<double>& w_over_gc) {
    std::vector<SweepRow> rows;
    rows.reserve(w_over_gc.size());
    for (double x : w_over_gc) {
        CumulantParams cp{n_atoms, x, 1.0};
        SweepRow row;
        row.w_over_gc = x;
        row.corr = closed_form_steady_state(cp);
        row.g2_zero = g2_zero_semiclassical(row.corr);
        rows.push_back(row);
    }
    return rows;
}

} // namespace superrad
