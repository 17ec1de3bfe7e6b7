#pragma once
// analytic: closed-form references — free spin rotation, one-mode
// weak-coupling fields and energies, frozen-spin limit, renormalized
// tunneling, Kondo/Bethe <sigma_x>, stationary-orbit predictions.

#include <array>
#include <cmath>
#include <stdexcept>

#include "types.hpp"
#include "model.hpp"

namespace dynamo {

struct BlochVector {
    double sx = 0, sy = 0, sz = 1;
};

// Exact free rotation (no bath), spin starting in |up>.
inline BlochVector free_spin(double t, double H, double v) {
    const double O = std::sqrt(H * H + v * v);
    const double H2 = H * H / (O * O), v2 = v * v / (O * O), vO = v / O;
    const double svt = std::sin(v * t), cvt = std::cos(v * t);
    const double sOt = std::sin(O * t), cOt = std::cos(O * t);
    BlochVector b;
    b.sx = H2 * svt - vO * cvt * sOt + v2 * svt * cOt;
    b.sy = 2.0 * v * H / (O * O) * std::sin(O * t / 2.0) * std::sin(O * t / 2.0);
    b.sz = H2 * cvt + vO * svt * sOt + v2 * cvt * cOt;
    return b;
}

struct OneModeParams {
    double omega = 1.0; // mode frequency
    double g = 0.0;     // coupling
    double H = 1.0;
    double v = 0.04;
    Preparation preparation = Preparation::P1;
};

inline constexpr double resonance_rel_tol = 1e-9;

// Weak-coupling induced field of a single mode (spin approximated by
// sz ~ cos(vt)); the resonant branch handles the removable omega -> v limit.
inline double one_mode_weak_field(double t, const OneModeParams& pm) {
    if (!(pm.omega > 0)) throw std::invalid_argument("one_mode_weak_field: omega must be > 0");
    const double g2 = pm.g * pm.g, w = pm.omega, v = pm.v;
    const double d1 = delta1(pm.preparation);
    if (std::abs(w - v) < resonance_rel_tol * v)
        return -0.5 * g2 * t * std::sin(v * t) - d1 * (g2 / v) * std::cos(v * t);
    const double pref = g2 * w / (w * w - v * v);
    if (pm.preparation == Preparation::P1)
        return pref * ((v * v / (w * w)) * std::cos(w * t) - std::cos(v * t));
    return pref * (std::cos(w * t) - std::cos(v * t));
}

struct OneModeEnergies {
    double E_dyn = 0, W_dr = 0, E_fluct = 0;
};

// Weak-coupling resonant-mode energies (omega = v regime of the dynamo).
inline OneModeEnergies one_mode_energies(double t, const OneModeParams& pm) {
    const double g2 = pm.g * pm.g, v = pm.v;
    const double d1 = delta1(pm.preparation);
    const double c2 = 1.0 - std::cos(2.0 * v * t);
    const double common = 2.0 * v * v * t * t - 2.0 * v * t * std::sin(2.0 * v * t);
    OneModeEnergies e;
    e.E_dyn = g2 / (32.0 * v) * ((4.0 * d1 - 3.0) * c2 + common);
    e.W_dr = g2 / (32.0 * v) * ((1.0 + 4.0 * d1) * c2 + common);
    const double s = std::sin(v * t);
    e.E_fluct = g2 / (4.0 * v) * s * s;
    return e;
}

// Frozen-spin induced field (strong coupling g^2/omega >> H): the spin stays
// polarized and the mode oscillates about its displaced equilibrium.
inline double frozen_field(double t, const OneModeParams& pm) {
    const double g2 = pm.g * pm.g;
    const double d1 = delta1(pm.preparation);
    return -(g2 / pm.omega) * (1.0 + (d1 - 1.0) * std::cos(pm.omega * t));
}

struct KondoParams {
    double Delta = 1.0;   // tunneling element (H sin(vt) at the equator: Delta = H)
    double alpha = 0.1;
    double omega_c = 100.0;

    double b() const { return alpha * std::log(alpha) + (1.0 - alpha) * std::log(1.0 - alpha); }
};

inline double renormalized_tunneling(const KondoParams& k) {
    if (k.alpha == 0.0) return k.Delta;
    return k.Delta * std::pow(k.Delta / k.omega_c, k.alpha / (1.0 - k.alpha));
}

namespace detail {
inline double gamma_fn(double x) { return std::tgamma(x); }
}

// Effective bandwidth D of the anisotropic-Kondo mapping:
// (D/w_c)^(2 alpha) = 2 Gamma(3/2-a) e^{-b} / (sqrt(pi) (1-2a) Gamma(1-2a) Gamma(1-a)).
inline double kondo_bandwidth(const KondoParams& k) {
    const double a = k.alpha;
    if (!(a > 0.0 && a < 0.5)) throw std::domain_error("kondo_bandwidth: requires 0 < alpha < 1/2");
    const double num = 2.0 * detail::gamma_fn(1.5 - a) * std::exp(-k.b());
    const double den = std::sqrt(pi) * (1.0 - 2.0 * a) * detail::gamma_fn(1.0 - 2.0 * a) * detail::gamma_fn(1.0 - a);
    return k.omega_c * std::pow(num / den, 1.0 / (2.0 * a));
}

inline double kondo_scale(const KondoParams& k) { // T_K = Delta (Delta/D)^(a/(1-a))
    return k.Delta * std::pow(k.Delta / kondo_bandwidth(k), k.alpha / (1.0 - k.alpha));
}

// Small-bias Bethe-ansatz magnetization along x:
// <sigma_x> = Delta/((2a-1) w_c) + C1(a) T_K / Delta.
inline double bethe_sx(const KondoParams& k) {
    const double a = k.alpha;
    if (!(a > 0.0 && a < 0.5)) throw std::domain_error("bethe_sx: requires 0 < alpha < 1/2");
    const double q = 2.0 - 2.0 * a;
    // exponent -b/q (not -b*q): the product form pushes <sigma_x> above 1 at
    // alpha ~ 0.1 and misses the stochastic solver by ~0.4, the quotient form
    // stays physical and matches it within statistics at alpha = 0.1..0.3
    const double C1 = std::exp(-k.b() / q) / (std::sqrt(pi) * (1.0 - a)) *
                      detail::gamma_fn(1.0 - 1.0 / q) / detail::gamma_fn(1.0 - a / q);
    return (1.0 / (2.0 * a - 1.0)) * k.Delta / k.omega_c + C1 * kondo_scale(k) / k.Delta;
}

// Stationary periodic orbit of the weakly damped driven spin:
// Bloch coordinates (H/O sin vt, v/O, H/O cos vt) and amplitudes of the
// stable cycle |Psi_-(t)> = (a cos - i c sin)|up> + (i c cos + a sin)|down>
// with a = sqrt((O+H)/2O), c = sqrt((O-H)/2O).
struct OrbitState {
    BlochVector bloch;
    cplx up, down;
};

inline OrbitState gkls_orbit(double t, double H, double v) {
    const double O = std::sqrt(H * H + v * v);
    OrbitState s;
    s.bloch.sx = H / O * std::sin(v * t);
    s.bloch.sy = v / O;
    s.bloch.sz = H / O * std::cos(v * t);
    const double a = std::sqrt((O + H) / (2.0 * O));
    const double c = std::sqrt((O - H) / (2.0 * O));
    const double ch = std::cos(v * t / 2.0), sh = std::sin(v * t / 2.0);
    s.up = cplx(a * ch, -c * sh);
    s.down = cplx(a * sh, c * ch);
    return s;
}

struct DynamoPredictions {
    double W_flow = 0;      // stationary work flow v H^2 J(v) / (8 O^2)
    double dE_dyn_half = 0; // dynamo energy over one half period a pi^2 v H^2 / (4 O^2)
    double C_dyn_gkls = 0;  // H / O
};

inline DynamoPredictions dynamo_predictions(const ModelParams& p) {
    const double O = p.Omega();
    DynamoPredictions d;
    d.W_flow = p.v * p.H * p.H * spectral_density(p.v, p) / (8.0 * O * O);
    d.dE_dyn_half = p.alpha * pi * pi * p.v * p.H * p.H / (4.0 * O * O);
    d.C_dyn_gkls = p.H / O;
    return d;
}

// Topological forms of the half-period dynamo energy.
inline double dyn_energy_from_chern_continuum(double alpha, double v, double C_dyn) {
    return alpha * pi * pi * v / 4.0 * C_dyn * C_dyn;
}
inline double dyn_energy_from_chern_one_mode(double g, double v, double C_dyn) {
    return g * g * pi * pi / (16.0 * v) * C_dyn * C_dyn;
}

} // namespace dynamo
