#pragma once
// Weak-coupling master equation for the driven spin: lab-frame Lindblad
// generator with time-dependent jump operators built from the stable
// periodic orbit, relaxation/dephasing rates from the spectral density,
// optional second-order level-shift term, and the stationary energetics.

#include <array>
#include <cmath>
#include <stdexcept>

#include "analytic.hpp"
#include "model.hpp"
#include "ode.hpp"
#include "types.hpp"

namespace dynamo {

struct DensityMatrix2 {
    cplx r00{1.0, 0.0}, r01{}, r10{}, r11{};

    static DensityMatrix2 pure(cplx up, cplx down) {
        DensityMatrix2 r;
        r.r00 = up * std::conj(up);
        r.r01 = up * std::conj(down);
        r.r10 = down * std::conj(up);
        r.r11 = down * std::conj(down);
        return r;
    }

    double trace_re() const { return (r00 + r11).real(); }

    double min_eigenvalue() const {
        const double m = 0.5 * (r00.real() + r11.real());
        const double d = 0.5 * (r00.real() - r11.real());
        return m - std::sqrt(d * d + std::norm(r01));
    }

    void validate(double tol = 1e-9) const {
        if (std::abs(trace_re() - 1.0) > tol || std::abs((r00 + r11).imag()) > tol)
            throw std::invalid_argument("DensityMatrix2: trace must be 1");
        if (std::abs(r00.imag()) > tol || std::abs(r11.imag()) > tol ||
            std::abs(r01 - std::conj(r10)) > tol)
            throw std::invalid_argument("DensityMatrix2: matrix must be Hermitian");
        if (min_eigenvalue() < -tol)
            throw std::invalid_argument("DensityMatrix2: matrix must be positive semidefinite");
    }
};

// Half the Euclidean Bloch distance; equals the trace distance for qubits.
inline double trace_distance(const DensityMatrix2& a, const DensityMatrix2& b) {
    const double dz = (a.r00 - a.r11 - b.r00 + b.r11).real();
    const cplx dc = a.r01 - b.r01;
    return 0.5 * std::sqrt(dz * dz + 4.0 * std::norm(dc));
}

struct GKLSRates {
    double gamma_relax = 0.0;     // sum_{l=+-} (Omega - l v)^2 J(Omega + l v) / 4
    double gamma_deph = 0.0;      // J(v) H^2 / (4 Omega^2)
    double level_shift = 0.0;     // coefficient of (P+ - P-)/1 in the shift Hamiltonian (0 unless enabled)
    bool weak_coupling_ok = true; // diagnostic: rates-defining J values << min(v, Omega)
};

namespace detail {

// Adaptive Simpson quadrature of f on [a, b].
template <typename F>
inline double simpson_rec(const F& f, double a, double m, double b, double fa, double fm, double fb,
                          double whole, double tol, int depth) {
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return simpson_rec(f, a, lm, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson_rec(f, m, rm, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

template <typename F>
inline double adaptive_simpson(const F& f, double a, double b, double tol) {
    const double m = 0.5 * (a + b);
    const double fa = f(a), fm = f(m), fb = f(b);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return simpson_rec(f, a, m, b, fa, fm, fb, whole, tol, 48);
}

} // namespace detail

// Second-order level shift delta(nu) = -(1/2pi) PV int_0^inf J(w)/(w - nu) dw,
// computed by adaptive quadrature with the pole subtracted analytically.
inline double level_shift_coefficient(double nu, const ModelParams& p) {
    const double L = (p.cutoff == Cutoff::Hard) ? p.omega_c
                                                : p.omega_c * 45.0 + std::max(nu, 0.0) * 2.0;
    const double tol = 1e-12 * std::max(1.0, p.alpha * p.omega_c * p.omega_c);
    double val;
    if (nu > 0.0 && nu < L) {
        const double Jn = spectral_density(nu, p);
        const double h = 1e-6 * std::max(1.0, nu);
        const double slope = (spectral_density(nu + h, p) - spectral_density(std::max(nu - h, 0.0), p)) /
                             (nu + h - std::max(nu - h, 0.0));
        auto reg = [&](double w) {
            const double d = w - nu;
            if (std::abs(d) < 1e-10 * std::max(1.0, nu)) return slope; // removable point at the pole
            return (spectral_density(w, p) - Jn) / d;
        };
        val = detail::adaptive_simpson(reg, 0.0, L, tol) + Jn * std::log((L - nu) / nu);
    } else {
        auto f = [&](double w) {
            if (w - nu < 1e-300) return 2.0 * pi * p.alpha; // nu = 0 endpoint: J(w)/w -> Ohmic slope
            return spectral_density(w, p) / (w - nu);
        };
        val = detail::adaptive_simpson(f, 0.0, L, tol);
    }
    return -val / (2.0 * pi);
}

inline GKLSRates build_rates(const ModelParams& p, bool with_level_shift = false) {
    p.validate();
    const double O = p.Omega();
    const double Jp = spectral_density(O + p.v, p);
    const double Jm = spectral_density(std::abs(O - p.v), p);
    const double Jv = spectral_density(p.v, p);
    GKLSRates r;
    r.gamma_relax = 0.25 * ((O - p.v) * (O - p.v) * Jp + (O + p.v) * (O + p.v) * Jm);
    r.gamma_deph = Jv * p.H * p.H / (4.0 * O * O);
    r.weak_coupling_ok = std::max({Jp, Jm, Jv}) < 0.1 * std::min(p.v, O);
    if (with_level_shift && p.alpha > 0.0) {
        // shifts of the two quasi-energy levels from the rotating-frame
        // second-order Hamiltonian (diagonal in the orbit basis):
        //   lam_- = sum_l delta(Omega + l v) ((v + l Omega)/2 Omega)^2 + delta(-l v)(H/2 Omega)^2
        //   lam_+ = sum_l delta(-Omega + l v) ((v - l Omega)/2 Omega)^2 + delta(l v)(H/2 Omega)^2
        double lm = 0.0, lp = 0.0;
        const double h2 = p.H * p.H / (4.0 * O * O);
        for (int l = -1; l <= 1; l += 2) {
            const double cp = (p.v + l * O) / (2.0 * O), cm = (p.v - l * O) / (2.0 * O);
            lm += level_shift_coefficient(O + l * p.v, p) * cp * cp +
                  level_shift_coefficient(-l * p.v, p) * h2;
            lp += level_shift_coefficient(-O + l * p.v, p) * cm * cm +
                  level_shift_coefficient(l * p.v, p) * h2;
        }
        r.level_shift = 0.5 * (lp - lm); // traceless part; the mean shifts a global phase only
    }
    return r;
}

namespace detail {

using Mat2 = std::array<cplx, 4>; // row major: {m00, m01, m10, m11}

inline Mat2 mul(const Mat2& a, const Mat2& b) {
    return {a[0] * b[0] + a[1] * b[2], a[0] * b[1] + a[1] * b[3],
            a[2] * b[0] + a[3] * b[2], a[2] * b[1] + a[3] * b[3]};
}

inline Mat2 adj(const Mat2& a) {
    return {std::conj(a[0]), std::conj(a[2]), std::conj(a[1]), std::conj(a[3])};
}

// D[X] rho = X rho X^dag - (X^dag X rho + rho X^dag X)/2
inline void add_dissipator(Mat2& out, const Mat2& X, const Mat2& rho, double rate) {
    const Mat2 Xd = adj(X);
    const Mat2 XdX = mul(Xd, X);
    const Mat2 a = mul(mul(X, rho), Xd);
    const Mat2 b = mul(XdX, rho);
    const Mat2 c = mul(rho, XdX);
    for (int i = 0; i < 4; ++i) out[i] += rate * (a[i] - 0.5 * (b[i] + c[i]));
}

// Jump operators at time t from the periodic orbit: the decay channel
// |Psi_-><Psi_+| and the dephasing channel P_+ - P_-.
inline void gkls_jump_ops(double t, const ModelParams& p, Mat2& L1, Mat2& L2) {
    const OrbitState s = gkls_orbit(t, p.H, p.v);
    const cplx um = s.up, dm = s.down;                      // |Psi_->
    const cplx up = -std::conj(dm), dp = std::conj(um);     // |Psi_+>
    L1 = {um * std::conj(up), um * std::conj(dp), dm * std::conj(up), dm * std::conj(dp)};
    L2 = {up * std::conj(up) - um * std::conj(um), up * std::conj(dp) - um * std::conj(dm),
          dp * std::conj(up) - dm * std::conj(um), dp * std::conj(dp) - dm * std::conj(dm)};
}

} // namespace detail

struct GKLSConfig {
    double tol = 1e-11;             // integrator tolerance
    bool with_level_shift = false;  // include the second-order Hamiltonian shift
    double trace_tol = 1e-10;       // trace-preservation guard
    double positivity_tol = 1e-8;   // smallest admissible eigenvalue is -positivity_tol
};

// Integrate d rho/dt = -i [H_S(t) + H_shift(t), rho]
//                      + gamma_relax D[|Psi_-(t)><Psi_+(t)|] rho
//                      + gamma_deph  D[P_+(t) - P_-(t)] rho
// in the lab frame and record the Bloch components on the grid.
inline SpinTrajectory propagate_gkls(const DensityMatrix2& rho0, const ModelParams& p,
                                     const TimeGrid& grid, const GKLSConfig& cfg = {}) {
    p.validate();
    rho0.validate();
    const GKLSRates rates = build_rates(p, cfg.with_level_shift);

    auto rhs = [&](double t, const StateVec& y, StateVec& dy) {
        const detail::Mat2 rho = {y[0], y[1], y[2], y[3]};
        // H_S = [[hz, hx], [hx, -hz]] plus the traceless orbit-basis shift
        const double hz = -0.5 * (p.H * std::cos(p.v * t) + p.M);
        const double hx = -0.5 * p.H * std::sin(p.v * t);
        detail::Mat2 L1, L2;
        detail::gkls_jump_ops(t, p, L1, L2);
        detail::Mat2 Hm = {cplx(hz), cplx(hx), cplx(hx), cplx(-hz)};
        if (rates.level_shift != 0.0)
            for (int i = 0; i < 4; ++i) Hm[i] += rates.level_shift * L2[i];
        const detail::Mat2 com = detail::mul(Hm, rho);
        const detail::Mat2 moc = detail::mul(rho, Hm);
        detail::Mat2 d;
        for (int i = 0; i < 4; ++i) d[i] = cplx(0.0, -1.0) * (com[i] - moc[i]);
        detail::add_dissipator(d, L1, rho, rates.gamma_relax);
        detail::add_dissipator(d, L2, rho, rates.gamma_deph);
        for (int i = 0; i < 4; ++i) dy[i] = d[i];
    };

    const std::size_t n = grid.n_points();
    SpinTrajectory out;
    out.grid = grid;
    out.sx.assign(n, 0.0);
    out.sy.assign(n, 0.0);
    out.sz.assign(n, 0.0);

    StateVec y = {rho0.r00, rho0.r01, rho0.r10, rho0.r11};
    AdaptiveRK rk;
    rk.tol = cfg.tol;
    rk.dt_init = std::min(grid.dt(), 0.05 / std::max({p.H, p.v, 1.0}));
    for (std::size_t i = 0; i < n; ++i) {
        if (i > 0) rk.integrate(rhs, grid.t(i - 1), grid.t(i), y);
        DensityMatrix2 r;
        r.r00 = y[0];
        r.r01 = y[1];
        r.r10 = y[2];
        r.r11 = y[3];
        if (std::abs(r.trace_re() - 1.0) > cfg.trace_tol)
            throw std::runtime_error("propagate_gkls: trace drifted beyond tolerance");
        if (r.min_eigenvalue() < -cfg.positivity_tol)
            throw std::runtime_error("propagate_gkls: state lost positivity; tighten integrator tolerance");
        out.sx[i] = 2.0 * r.r01.real();
        out.sy[i] = -2.0 * r.r01.imag();
        out.sz[i] = (r.r00 - r.r11).real();
    }
    out.compute_sz_dot();
    return out;
}

struct StationaryEnergetics {
    double W_flow = 0.0;       // long-time average work flow
    double dE_dyn_half = 0.0;  // dynamo energy accumulated over one half period
    double eta_longtime = 0.0; // dE_dyn_half / (W_flow * pi / v)
};

inline StationaryEnergetics stationary_energetics(const ModelParams& p) {
    const DynamoPredictions d = dynamo_predictions(p);
    StationaryEnergetics s;
    s.W_flow = d.W_flow;
    s.dE_dyn_half = d.dE_dyn_half;
    s.eta_longtime = (d.W_flow > 0.0) ? d.dE_dyn_half / (d.W_flow * pi / p.v) : 0.0;
    return s;
}

} // namespace dynamo
