#pragma once
// energetics-topology: drive work, coherent/dynamo/fluctuation energy
// accounts, heat-work split of the bath, efficiencies and the dynamically
// measured Chern number.

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

#include "types.hpp"
#include "analytic.hpp"
#include "csv.hpp"

namespace dynamo {

inline double undefined_value() { return std::numeric_limits<double>::quiet_NaN(); }

// Cumulative trapezoid of f sampled on the grid.
inline std::vector<double> cumtrapz(const TimeGrid& g, const std::vector<double>& f) {
    std::vector<double> out(f.size(), 0.0);
    const double dt = g.dt();
    for (std::size_t i = 1; i < f.size(); ++i) out[i] = out[i - 1] + 0.5 * dt * (f[i - 1] + f[i]);
    return out;
}

// W_dr(t) = (H v / 2) Int_0^t [sin(vt') sz - cos(vt') sx] dt'.
inline std::vector<double> work_drive(const SpinTrajectory& traj, const ModelParams& p) {
    std::vector<double> integrand(traj.sz.size());
    for (std::size_t i = 0; i < integrand.size(); ++i) {
        const double t = traj.grid.t(i);
        integrand[i] = 0.5 * p.H * p.v * (std::sin(p.v * t) * traj.sz[i] - std::cos(p.v * t) * traj.sx[i]);
    }
    return cumtrapz(traj.grid, integrand);
}

// E_dis = sum_k w_k |<b_k>|^2 — energy in coherent displacement.
inline std::vector<double> dis_energy(const BathRecord& rec, const ModeSet& ms) {
    std::vector<double> out(rec.b.size(), 0.0);
    for (std::size_t i = 0; i < out.size(); ++i)
        for (std::size_t k = 0; k < rec.n_modes; ++k) out[i] += ms[k].omega * std::norm(rec.b[i][k]);
    return out;
}

// Flow form of the same quantity: E_dis(t) - E_dis(0) = -Int h_dot <S> dt.
inline std::vector<double> dis_energy_flow(const BathRecord& rec, const ModeSet& ms) {
    const std::size_t n = rec.b.size();
    std::vector<double> h(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < rec.n_modes; ++k) h[i] += 2.0 * ms[k].g * rec.b[i][k].real();
    // central-difference h_dot, then cumulative trapezoid of -h_dot <S>
    std::vector<double> integrand(n, 0.0);
    const double dt = rec.grid.dt();
    for (std::size_t i = 0; i < n; ++i) {
        double hd;
        if (i == 0)
            hd = n > 2 ? (-3.0 * h[0] + 4.0 * h[1] - h[2]) / (2 * dt) : 0.0;
        else if (i + 1 == n)
            hd = n > 2 ? (3.0 * h[n - 1] - 4.0 * h[n - 2] + h[n - 3]) / (2 * dt) : 0.0;
        else
            hd = (h[i + 1] - h[i - 1]) / (2 * dt);
        integrand[i] = -hd * rec.S[i];
    }
    return cumtrapz(rec.grid, integrand);
}

// E_dyn = sum_k w_k |<b_k> + (g_k/w_k) <S>|^2 — displacement measured from the
// adiabatically shifted reference.
inline std::vector<double> dynamo_energy(const BathRecord& rec, const ModeSet& ms) {
    std::vector<double> out(rec.b.size(), 0.0);
    for (std::size_t i = 0; i < out.size(); ++i)
        for (std::size_t k = 0; k < rec.n_modes; ++k) {
            const cplx d = rec.b[i][k] + ms[k].g / ms[k].omega * rec.S[i];
            out[i] += ms[k].omega * std::norm(d);
        }
    return out;
}

// Continuum form Delta E_dyn(t) = (alpha pi / 2) Int_0^t sz_dot^2 dt.
inline std::vector<double> dynamo_energy_continuum(const SpinTrajectory& traj, const ModelParams& p) {
    SpinTrajectory tmp;
    const SpinTrajectory* src = &traj;
    if (traj.sz_dot.empty()) {
        tmp = traj;
        tmp.compute_sz_dot();
        src = &tmp;
    }
    std::vector<double> integrand(src->sz_dot.size());
    for (std::size_t i = 0; i < integrand.size(); ++i)
        integrand[i] = 0.5 * p.alpha * pi * src->sz_dot[i] * src->sz_dot[i];
    return cumtrapz(src->grid, integrand);
}

struct FluctEnergy {
    std::vector<double> total, bath, interaction, spin;
};

// E_fluct = sum_k w_k [<n_k> - |<b_k>|^2]                     (bath part)
//         + sum_k g_k [<S(b_k+b_k^dag)> - <S><b_k+b_k^dag>]   (cross part)
//         + sum_k (g_k^2/w_k)(1/4 - <S>^2)                    (spin part)
inline FluctEnergy fluct_energy(const BathRecord& rec, const ModeSet& ms) {
    const std::size_t n = rec.b.size();
    FluctEnergy f;
    f.total.assign(n, 0.0);
    f.bath.assign(n, 0.0);
    f.interaction.assign(n, 0.0);
    f.spin.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < rec.n_modes; ++k) {
            const double w = ms[k].omega, g = ms[k].g;
            f.bath[i] += w * (rec.n[i][k] - std::norm(rec.b[i][k]));
            f.interaction[i] += g * (rec.cross[i][k] - rec.S[i] * 2.0 * rec.b[i][k].real());
            f.spin[i] += g * g / w * (0.25 - rec.S[i] * rec.S[i]);
        }
        f.total[i] = f.bath[i] + f.interaction[i] + f.spin[i];
    }
    return f;
}

// Q_R = -Delta sum w_k (<n> - |<b>|^2): heat given up by the bath;
// W_R = -Delta sum w_k |<b>|^2 = -Delta E_dis: work extracted from coherent displacement.
inline void heat_work_split(const BathRecord& rec, const ModeSet& ms, std::vector<double>& Q_R,
                            std::vector<double>& W_R) {
    const std::size_t n = rec.b.size();
    std::vector<double> fl(n, 0.0), dis = dis_energy(rec, ms);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < rec.n_modes; ++k)
            fl[i] += ms[k].omega * (rec.n[i][k] - std::norm(rec.b[i][k]));
    Q_R.assign(n, 0.0);
    W_R.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        Q_R[i] = -(fl[i] - fl[0]);
        W_R[i] = -(dis[i] - dis[0]);
    }
}

struct EnergyLedger {
    TimeGrid grid;
    std::vector<double> W_dr, E_S, E_dis, E_dyn, E_fluct;
    std::vector<double> E_fluct_bath, E_fluct_int, E_fluct_spin;
    std::vector<double> E_int, Q_R, W_R;
    double eta = 0.0, eta_M = 0.0; // at the final grid time; NaN when undefined
    double C = 0.0, C_dyn = 0.0;

    csv::Table to_table() const {
        csv::Table t;
        t.add_column("t", grid.times());
        t.add_column("W_dr", W_dr);
        t.add_column("E_S", E_S);
        t.add_column("E_dis", E_dis);
        t.add_column("E_dyn", E_dyn);
        t.add_column("E_fluct", E_fluct);
        t.add_column("E_fluct_bath", E_fluct_bath);
        t.add_column("E_fluct_int", E_fluct_int);
        t.add_column("E_fluct_spin", E_fluct_spin);
        t.add_column("E_int", E_int);
        t.add_column("Q_R", Q_R);
        t.add_column("W_R", W_R);
        return t;
    }
};

// eta = dE_dyn / W_dr, eta_M = dE_dyn / (W_dr - M); NaN when |denominator| <= 1e-12.
inline double efficiency_at(double dE_dyn, double denom) {
    return std::abs(denom) <= 1e-12 ? undefined_value() : dE_dyn / denom;
}

// Ground-state Chern number of the biased field sphere: C = [sz_gs(0) - sz_gs(pi)]/2.
inline double chern_number_static(const ModelParams& p) {
    auto sgn = [](double x) { return x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0); };
    const double sz_0 = sgn(p.H + p.M);   // ground-state sz at theta = 0
    const double sz_pi = -sgn(p.H - p.M); // ground-state sz at theta = pi
    return 0.5 * (sz_0 - sz_pi);
}

struct ChernNumbers {
    double C = 0.0;          // static ground-state invariant
    double C_dyn = 0.0;      // (sz(0) - sz(pi/v))/2 from the trajectory
    double C_dyn_integral = 0.0; // -(H/2) Int_0^{pi/v} sin(vt) <sigma_y> dt cross-check
};

// The trajectory must cover at least [0, pi/v].
inline ChernNumbers chern_numbers(const SpinTrajectory& traj, const ModelParams& p) {
    ChernNumbers c;
    c.C = chern_number_static(p);
    const double t_half = pi / p.v;
    if (traj.grid.t0 > 0.0 || traj.grid.tf < t_half - 1e-9)
        throw std::invalid_argument("chern_numbers: trajectory must cover [0, pi/v]");
    // index of the grid point closest to pi/v
    const double dt = traj.grid.dt();
    std::size_t ih = static_cast<std::size_t>(std::llround(t_half / dt));
    ih = std::min(ih, traj.sz.size() - 1);
    c.C_dyn = 0.5 * (traj.sz[0] - traj.sz[ih]);
    std::vector<double> integrand(ih + 1);
    for (std::size_t i = 0; i <= ih; ++i)
        integrand[i] = std::sin(p.v * traj.grid.t(i)) * traj.sy[i];
    double acc = 0.0;
    for (std::size_t i = 1; i <= ih; ++i) acc += 0.5 * dt * (integrand[i - 1] + integrand[i]);
    // sz_dot = -H sin(vt) sy  =>  C_dyn = (sz(0) - sz(pi/v))/2 = +(H/2) Int sin(vt) sy dt
    c.C_dyn_integral = 0.5 * p.H * acc;
    return c;
}

// Predicted half-period dynamo energy from C_dyn and the relative deviation of
// a measured value.
struct TopologyEnergyReport {
    double predicted = 0.0;
    double measured = 0.0;
    double rel_dev = 0.0;
};

enum class TopologyMode { OneMode, Continuum };

inline TopologyEnergyReport topology_energy_relation(double measured_dE_dyn, double C_dyn, const ModelParams& p,
                                                     TopologyMode mode, double g_one_mode = 0.0) {
    TopologyEnergyReport r;
    r.measured = measured_dE_dyn;
    r.predicted = mode == TopologyMode::OneMode ? dyn_energy_from_chern_one_mode(g_one_mode, p.v, C_dyn)
                                                : dyn_energy_from_chern_continuum(p.alpha, p.v, C_dyn);
    const double scale = std::max(std::abs(r.predicted), std::abs(r.measured));
    r.rel_dev = scale > 0 ? std::abs(r.predicted - r.measured) / scale : 0.0;
    return r;
}

// Full ledger assembly from an ED run.
inline EnergyLedger build_ledger(const SpinTrajectory& spin, const BathRecord& rec, const ModeSet& ms,
                                 const ModelParams& p, const std::vector<double>& W_dr_integrated = {}) {
    EnergyLedger led;
    led.grid = spin.grid;
    const std::size_t n = spin.sz.size();
    led.W_dr = W_dr_integrated.empty() ? work_drive(spin, p) : W_dr_integrated;
    led.E_S.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = spin.grid.t(i);
        led.E_S[i] = -0.5 * p.H * (std::cos(p.v * t) * spin.sz[i] + std::sin(p.v * t) * spin.sx[i]) -
                     0.5 * p.M * spin.sz[i];
    }
    led.E_dis = dis_energy(rec, ms);
    led.E_dyn = dynamo_energy(rec, ms);
    FluctEnergy f = fluct_energy(rec, ms);
    led.E_fluct = std::move(f.total);
    led.E_fluct_bath = std::move(f.bath);
    led.E_fluct_int = std::move(f.interaction);
    led.E_fluct_spin = std::move(f.spin);
    led.E_int.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < rec.n_modes; ++k) led.E_int[i] += ms[k].g * rec.cross[i][k];
    heat_work_split(rec, ms, led.Q_R, led.W_R);

    const double dE_dyn = led.E_dyn.back() - led.E_dyn.front();
    led.eta = efficiency_at(dE_dyn, led.W_dr.back());
    led.eta_M = efficiency_at(dE_dyn, led.W_dr.back() - p.M);
    led.C = chern_number_static(p);
    if (spin.grid.t0 <= 0.0 && spin.grid.tf >= pi / p.v - 1e-9)
        led.C_dyn = chern_numbers(spin, p).C_dyn;
    else
        led.C_dyn = undefined_value();
    return led;
}

} // namespace dynamo
