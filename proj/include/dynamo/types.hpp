#pragma once
// Core parameter and trajectory types shared by every solver.
//
// Conventions (units with hbar = 1, H = 1 as default energy scale):
//   spin Hamiltonian   H_S(t) = -(H/2)(cos(vt) sigma_z + sin(vt) sigma_x) - (M/2) sigma_z
//   coupling operator  S = sigma_z / 2,  bath operator R = sum_k g_k (b_k + b_k^dag)
//   induced field      h(t) = <R(t)>

#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace dynamo {

using cplx = std::complex<double>;

inline constexpr double pi = 3.14159265358979323846;

enum class Cutoff { Exponential, Hard };
enum class Preparation { P1, P2 }; // P1: joint ground state (displaced bath), P2: spin-up x vacuum

inline double delta1(Preparation p) { return p == Preparation::P1 ? 1.0 : 0.0; }

struct ModelParams {
    double H = 1.0;       // field amplitude (energy)
    double v = 0.04;      // drive angular velocity (energy)
    double M = 0.0;       // static bias along z
    double alpha = 0.0;   // dimensionless Ohmic coupling
    double omega_c = 100; // cutoff frequency
    Cutoff cutoff = Cutoff::Exponential;
    Preparation preparation = Preparation::P2;

    double Omega() const { return std::sqrt(H * H + v * v); }

    void validate(bool scaling_limit = false) const {
        if (!(H > 0)) throw std::invalid_argument("ModelParams: H must be > 0");
        if (!(v > 0)) throw std::invalid_argument("ModelParams: v must be > 0");
        if (alpha < 0) throw std::invalid_argument("ModelParams: alpha must be >= 0");
        if (!(omega_c > 0)) throw std::invalid_argument("ModelParams: omega_c must be > 0");
        if (scaling_limit && !(omega_c > std::max(H, v)))
            throw std::invalid_argument("ModelParams: omega_c must exceed max(H, v) in the scaling limit");
    }
};

struct Mode {
    double omega = 1.0;       // mode frequency (> 0)
    double g = 0.0;           // real coupling (>= 0)
    double delta_omega = 0.0; // spectral width of the bin this mode represents
};

struct ModeSet {
    std::vector<Mode> modes;

    std::size_t size() const { return modes.size(); }
    const Mode& operator[](std::size_t k) const { return modes[k]; }

    void validate() const {
        double prev = 0.0;
        for (const auto& m : modes) {
            if (!(m.omega > prev)) throw std::invalid_argument("ModeSet: frequencies must be strictly increasing and > 0");
            if (m.g < 0) throw std::invalid_argument("ModeSet: couplings must be >= 0");
            if (m.delta_omega < 0) throw std::invalid_argument("ModeSet: widths must be >= 0");
            prev = m.omega;
        }
    }
};

struct TimeGrid {
    double t0 = 0.0;
    double tf = 1.0;
    std::size_t n_steps = 100; // number of intervals; n_steps+1 samples

    TimeGrid() = default;
    TimeGrid(double t0_, double tf_, std::size_t n) : t0(t0_), tf(tf_), n_steps(n) {
        if (!(tf > t0)) throw std::invalid_argument("TimeGrid: tf must exceed t0");
        if (n_steps == 0) throw std::invalid_argument("TimeGrid: n_steps must be >= 1");
    }

    double dt() const { return (tf - t0) / static_cast<double>(n_steps); }
    std::size_t n_points() const { return n_steps + 1; }
    double t(std::size_t i) const { return t0 + dt() * static_cast<double>(i); }

    std::vector<double> times() const {
        std::vector<double> out(n_points());
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = t(i);
        return out;
    }
};

struct SpinTrajectory {
    TimeGrid grid;
    std::vector<double> sx, sy, sz;
    std::vector<double> sz_dot; // optional; empty if not computed

    bool empty() const { return sz.empty(); }

    // Central differences in the interior, one-sided second-order at the ends.
    void compute_sz_dot() {
        const std::size_t n = sz.size();
        sz_dot.assign(n, 0.0);
        if (n < 3) return;
        const double dt = grid.dt();
        sz_dot[0] = (-3.0 * sz[0] + 4.0 * sz[1] - sz[2]) / (2.0 * dt);
        for (std::size_t i = 1; i + 1 < n; ++i) sz_dot[i] = (sz[i + 1] - sz[i - 1]) / (2.0 * dt);
        sz_dot[n - 1] = (3.0 * sz[n - 1] - 4.0 * sz[n - 2] + sz[n - 3]) / (2.0 * dt);
    }
};

struct FieldTrajectory {
    TimeGrid grid;
    std::vector<double> h_total, h_free, h_ad, h_dyn;
    double dt_omega_max = 0.0;  // grid resolution metadata: dt * max frequency entering the kernel
    bool accuracy_warning = false;
};

// Per-mode, per-time bath moments extracted from an ED run.
struct BathRecord {
    TimeGrid grid;
    std::size_t n_modes = 0;
    // Indexed [time][mode].
    std::vector<std::vector<cplx>> b;        // <b_k>
    std::vector<std::vector<double>> n;      // <n_k>
    std::vector<std::vector<double>> n2;     // <n_k^2> (for the occupation audit)
    std::vector<std::vector<double>> cross;  // Re <S (b_k + b_k^dag)>
    std::vector<double> S;                   // <S> = <sigma_z>/2
};

} // namespace dynamo
