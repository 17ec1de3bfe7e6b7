#pragma once
// model-core: spectral densities, memory kernels, bath discretization and the
// exact convolution reconstructing the induced field from the spin motion.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "types.hpp"

namespace dynamo {

// Ohmic spectral density. Exponential cutoff: J = 2 pi alpha w exp(-w/w_c);
// hard cutoff: J = 2 pi alpha w for w <= w_c, else 0.
inline double spectral_density(double omega, const ModelParams& p) {
    if (omega < 0) throw std::domain_error("spectral_density: omega must be >= 0");
    if (p.cutoff == Cutoff::Exponential) return 2.0 * pi * p.alpha * omega * std::exp(-omega / p.omega_c);
    return omega <= p.omega_c ? 2.0 * pi * p.alpha * omega : 0.0;
}

// Memory kernel K(t) = -(2/pi) Int J(w) sin(w t) dw. Odd in t.
inline double memory_kernel(double t, const ModelParams& p) {
    const double wc = p.omega_c;
    if (p.cutoff == Cutoff::Exponential) {
        const double d = 1.0 + wc * wc * t * t;
        return -8.0 * p.alpha * wc * wc * wc * t / (d * d);
    }
    const double x = wc * t;
    if (std::abs(x) < 1e-6) {
        // sin(x) - x cos(x) = x^3/3 - x^5/30 + ...
        return -4.0 * p.alpha * wc * wc * (x / 3.0 - x * x * x / 30.0);
    }
    return -4.0 * p.alpha * (wc * wc * std::sin(x) - wc * wc * x * std::cos(x)) / (x * x);
}

// Discrete kernel K(t) = -2 sum_k g_k^2 sin(w_k t).
inline double memory_kernel(double t, const ModeSet& ms) {
    double k = 0.0;
    for (const auto& m : ms.modes) k -= 2.0 * m.g * m.g * std::sin(m.omega * t);
    return k;
}

enum class DiscretizationScheme { Linear };

// Equal-width bins covering (0, omega_max], mode centers at bin midpoints,
// g_k^2 = 2 alpha w_k dw_k.
inline ModeSet discretize_bath(const ModelParams& p, std::size_t n_modes, double omega_max,
                               DiscretizationScheme scheme = DiscretizationScheme::Linear) {
    if (n_modes == 0) throw std::invalid_argument("discretize_bath: n_modes must be >= 1");
    if (!(omega_max > 0)) throw std::invalid_argument("discretize_bath: omega_max must be > 0");
    (void)scheme; // only the linear scheme is defined
    ModeSet ms;
    ms.modes.resize(n_modes);
    const double dw = omega_max / static_cast<double>(n_modes);
    for (std::size_t k = 0; k < n_modes; ++k) {
        const double w = (static_cast<double>(k) + 0.5) * dw;
        ms.modes[k] = Mode{w, std::sqrt(2.0 * p.alpha * w * dw), dw};
    }
    return ms;
}

// Free-field term present for preparation P1 only: sum_k (g_k^2/w_k) cos(w_k t).
inline double free_field_cos_sum(double t, const ModeSet& ms) {
    double f = 0.0;
    for (const auto& m : ms.modes) f += m.g * m.g / m.omega * std::cos(m.omega * t);
    return f;
}

inline double free_field_cos_sum(double t, const ModelParams& p) {
    const double wc = p.omega_c;
    if (p.cutoff == Cutoff::Exponential) return 2.0 * p.alpha * wc / (1.0 + wc * wc * t * t);
    if (std::abs(wc * t) < 1e-8) return 2.0 * p.alpha * wc;
    return 2.0 * p.alpha * std::sin(wc * t) / t;
}

namespace detail {

// h(t_i) = Int_0^{t_i} K(t_i - t') sz(t')/2 dt' - delta_1 * free(t_i),
// trapezoid quadrature on the uniform grid.
template <class KernelFn, class FreeFn>
FieldTrajectory convolve_field(const SpinTrajectory& sz_traj, double delta_1, KernelFn&& K, FreeFn&& free_term,
                               double omega_max_meta) {
    if (sz_traj.empty()) throw std::invalid_argument("induced_field_from_sz: empty trajectory");
    const std::size_t n = sz_traj.sz.size();
    const double dt = sz_traj.grid.dt();
    FieldTrajectory out;
    out.grid = sz_traj.grid;
    out.dt_omega_max = dt * omega_max_meta;
    out.h_total.assign(n, 0.0);
    // Kernel values on the difference grid (uniform spacing).
    std::vector<double> Kd(n);
    for (std::size_t d = 0; d < n; ++d) Kd[d] = K(dt * static_cast<double>(d));
    for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        if (i > 0) {
            acc += 0.5 * (Kd[i] * sz_traj.sz[0] + Kd[0] * sz_traj.sz[i]);
            for (std::size_t j = 1; j < i; ++j) acc += Kd[i - j] * sz_traj.sz[j];
            acc *= dt;
        }
        out.h_total[i] = 0.5 * acc - delta_1 * free_term(sz_traj.grid.t(i));
    }
    return out;
}

} // namespace detail

// Exact induced-field reconstruction from the measured spin component alone,
// discrete-bath kernel. Holds at every coupling strength.
inline FieldTrajectory induced_field_from_sz(const SpinTrajectory& traj, const ModeSet& ms, Preparation prep) {
    double wmax = 0.0;
    for (const auto& m : ms.modes) wmax = std::max(wmax, m.omega);
    return detail::convolve_field(
        traj, delta1(prep), [&](double t) { return memory_kernel(t, ms); },
        [&](double t) { return free_field_cos_sum(t, ms); }, wmax);
}

// Continuum-bath variant.
inline FieldTrajectory induced_field_from_sz(const SpinTrajectory& traj, const ModelParams& p) {
    return detail::convolve_field(
        traj, delta1(p.preparation), [&](double t) { return memory_kernel(t, p); },
        [&](double t) { return free_field_cos_sum(t, p); }, p.omega_c);
}

// Scaling-limit decomposition of the continuum induced field (exponential
// cutoff): h_free decays on the cutoff scale, h_ad follows the spin, h_dyn is
// the retarded reaction proportional to the spin velocity.
inline FieldTrajectory decompose_field_continuum(const SpinTrajectory& traj, const ModelParams& p) {
    if (traj.empty()) throw std::invalid_argument("decompose_field_continuum: empty trajectory");
    if (p.cutoff != Cutoff::Exponential)
        throw std::invalid_argument("decompose_field_continuum: exponential cutoff required");
    SpinTrajectory tmp;
    const SpinTrajectory* src = &traj;
    if (traj.sz_dot.empty()) {
        tmp = traj;
        tmp.compute_sz_dot();
        src = &tmp;
    }
    const std::size_t n = src->sz.size();
    const double d1 = delta1(p.preparation);
    FieldTrajectory out;
    out.grid = src->grid;
    out.dt_omega_max = src->grid.dt() * p.omega_c;
    out.accuracy_warning = src->grid.dt() * p.H > 0.2;
    out.h_free.resize(n);
    out.h_ad.resize(n);
    out.h_dyn.resize(n);
    out.h_total.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = src->grid.t(i);
        out.h_free[i] = (1.0 - d1) * 2.0 * p.alpha * p.omega_c / (1.0 + p.omega_c * p.omega_c * t * t);
        out.h_ad[i] = -2.0 * p.alpha * p.omega_c * src->sz[i];
        out.h_dyn[i] = p.alpha * pi * src->sz_dot[i];
        out.h_total[i] = out.h_free[i] + out.h_ad[i] + out.h_dyn[i];
    }
    return out;
}

} // namespace dynamo
