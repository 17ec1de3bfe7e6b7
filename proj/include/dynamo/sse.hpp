#pragma once
// Stochastic Schrodinger equation for the continuum Ohmic bath: the bath
// influence is encoded in a Gaussian stochastic field with covariance Q2/pi,
// each realization drives a linear non-Hermitian 4-component ODE, and the
// reduced density matrix is recovered as a trajectory average.

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <thread>
#include <vector>

#include "ode.hpp"
#include "types.hpp"

namespace dynamo {

// Bath correlation phases for the Ohmic spectral density with exponential
// cutoff at T = 0. Q1 is the friction (imaginary) phase, Q2 the decoherence
// (real) phase; for omega_c * t >> 1, Q1 saturates at pi^2 * alpha.
struct BathCorrelation {
    double alpha = 0.0;
    double omega_c = 100.0;
    bool use_Q1_plateau = true;

    double Q1(double t) const {
        return use_Q1_plateau ? pi * pi * alpha : 2.0 * pi * alpha * std::atan(omega_c * t);
    }
    double Q2(double t) const { return pi * alpha * std::log1p(omega_c * omega_c * t * t); }
};

namespace detail {

// Deterministic standard normals: Box-Muller over the raw mt19937_64 stream,
// so results do not depend on the standard library's distribution algorithm.
struct GaussianRNG {
    std::mt19937_64 eng;
    double spare = 0.0;
    bool have = false;

    explicit GaussianRNG(std::uint64_t seed) : eng(seed) {}
    double uniform01() { return ((eng() >> 11) + 1.0) * 0x1.0p-53; } // (0, 1]
    double operator()() {
        if (have) {
            have = false;
            return spare;
        }
        const double r = std::sqrt(-2.0 * std::log(uniform01()));
        const double a = 2.0 * pi * uniform01();
        spare = r * std::sin(a);
        have = true;
        return r * std::cos(a);
    }
};

// In-place FFT; radix-2 for power-of-two sizes, direct transform otherwise.
inline void fft(std::vector<cplx>& a, bool inverse) {
    const std::size_t n = a.size();
    if (n < 2) return;
    if (n & (n - 1)) {
        std::vector<cplx> out(n, cplx(0.0, 0.0));
        const double sgn = inverse ? 1.0 : -1.0;
        for (std::size_t k = 0; k < n; ++k)
            for (std::size_t j = 0; j < n; ++j)
                out[k] += a[j] * std::polar(1.0, sgn * 2.0 * pi * double(k) * double(j) / double(n));
        a = std::move(out);
        return;
    }
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const cplx wl = std::polar(1.0, (inverse ? 2.0 : -2.0) * pi / double(len));
        for (std::size_t i = 0; i < n; i += len) {
            cplx w(1.0, 0.0);
            for (std::size_t j = 0; j < len / 2; ++j) {
                const cplx u = a[i + j], v = a[i + j + len / 2] * w;
                a[i + j] = u + v;
                a[i + j + len / 2] = u - v;
                w *= wl;
            }
        }
    }
}

} // namespace detail

// Cosine-series coefficients g_m of the even periodic extension of
// Q2(tau * t_f) / pi on tau in [-1, 1]:
//   Q2(tau t_f)/pi ~ g[0]/2 + sum_{m=1..M} g[m] cos(m pi tau).
// Computed by an FFT on a 2M-point grid. The coefficients for m >= 1 are
// structurally negative (Q2 grows away from tau = 0, like |tau|); the field
// sampler handles them with complex mode amplitudes.
inline std::vector<double> fourier_coefficients(const BathCorrelation& bc, double t_f, std::size_t M) {
    if (t_f <= 0.0) throw std::invalid_argument("fourier_coefficients: t_f must be positive");
    if (M < 2) throw std::invalid_argument("fourier_coefficients: M must be at least 2");
    const std::size_t n = 2 * M;
    std::vector<cplx> f(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double tau = double(j) / double(M);
        const double te = std::min(tau, 2.0 - tau); // even periodic extension
        f[j] = cplx(bc.Q2(te * t_f) / pi, 0.0);
    }
    detail::fft(f, false);
    std::vector<double> g(M + 1);
    g[0] = 2.0 * f[0].real() / double(n);
    for (std::size_t m = 1; m < M; ++m) g[m] = 2.0 * f[m].real() / double(n);
    g[M] = f[M].real() / double(n);
    return g;
}

// One realization of the stochastic field
//   h_s(tau t_f) = sum_m sqrt(g_m) [s1_m cos(m pi tau) - s2_m sin(m pi tau)]
// with independent standard normals s1, s2. sqrt of a negative coefficient is
// imaginary, making h_s a complex Gaussian field; the analytic covariance
// E[h_s(t) h_s(s)] = Q2(t-s)/pi is exactly what the influence functional
// requires (clipping the negative g_m would replace it by a constant).
struct StochasticField {
    std::size_t M = 0;
    std::uint64_t seed = 0;
    double t_f = 0.0;
    std::vector<cplx> b_cos, b_sin; // per-mode amplitude x Gaussian draw
    std::vector<cplx> h;            // samples on the output grid
    std::vector<cplx> table;        // oversampled values over the full tau-period [0,2)
    double pts_per_tau = 0.0;       // table index per unit tau

    // Catmull-Rom interpolation on the periodic oversampled table.
    cplx eval(double t) const {
        const std::size_t L = table.size();
        double x = (t / t_f) * pts_per_tau;
        const double jf = std::floor(x);
        const double s = x - jf;
        const std::ptrdiff_t j = static_cast<std::ptrdiff_t>(jf);
        auto at = [&](std::ptrdiff_t k) {
            std::ptrdiff_t idx = (k % static_cast<std::ptrdiff_t>(L) + static_cast<std::ptrdiff_t>(L)) %
                                 static_cast<std::ptrdiff_t>(L);
            return table[static_cast<std::size_t>(idx)];
        };
        const cplx p0 = at(j - 1), p1 = at(j), p2 = at(j + 1), p3 = at(j + 2);
        return 0.5 * (2.0 * p1 + s * ((p2 - p0) + s * ((2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3) +
                                                       s * (3.0 * (p1 - p2) + p3 - p0))));
    }

    // Direct mode sum; slow, used to validate the interpolated table.
    cplx eval_exact(double t) const {
        const double tau = t / t_f;
        cplx acc(0.0, 0.0);
        for (std::size_t m = 0; m <= M; ++m) {
            const double a = double(m) * pi * tau;
            acc += b_cos[m] * std::cos(a) - b_sin[m] * std::sin(a);
        }
        return acc;
    }
};

inline StochasticField sample_field(const std::vector<double>& g, const TimeGrid& grid, std::uint64_t seed) {
    if (g.empty()) throw std::invalid_argument("sample_field: empty coefficient vector");
    for (double gm : g)
        if (!std::isfinite(gm)) throw std::invalid_argument("sample_field: non-finite Fourier coefficient");
    StochasticField f;
    f.M = g.size() - 1;
    f.seed = seed;
    f.t_f = grid.tf;
    f.b_cos.resize(f.M + 1);
    f.b_sin.resize(f.M + 1);
    detail::GaussianRNG rng(seed);
    for (std::size_t m = 0; m <= f.M; ++m) {
        const double s1 = rng();
        const double s2 = rng();
        const double gm = (m == 0 ? 0.5 * g[0] : g[m]);
        const cplx a = std::sqrt(cplx(gm, 0.0));
        f.b_cos[m] = a * s1;
        f.b_sin[m] = (m == 0 ? cplx(0.0, 0.0) : a * s2);
    }

    // Oversampled table over tau in [0, 2) built by one inverse FFT:
    // h(tau) = sum_m (b_cos + i b_sin)/2 e^{i m pi tau} + (b_cos - i b_sin)/2 e^{-i m pi tau}.
    std::size_t L = 64;
    while (L < 16 * (f.M + 1)) L <<= 1;
    std::vector<cplx> F(L, cplx(0.0, 0.0));
    const cplx iu(0.0, 1.0);
    for (std::size_t m = 0; m <= f.M; ++m) {
        F[m] += 0.5 * (f.b_cos[m] + iu * f.b_sin[m]);
        F[(L - m) % L] += 0.5 * (f.b_cos[m] - iu * f.b_sin[m]);
    }
    detail::fft(F, true); // unscaled inverse: F_j = sum_k F_k e^{+2 pi i jk/L}
    f.table = std::move(F);
    f.pts_per_tau = double(L) / 2.0;

    const std::size_t n = grid.n_points();
    f.h.resize(n);
    for (std::size_t i = 0; i < n; ++i) f.h[i] = f.eval(grid.t(i));
    return f;
}

namespace detail {

// Trajectories whose field exponent would overflow exp are excluded (with a
// count) rather than clamped, to keep the average unbiased among kept ones.
inline constexpr double sse_flag_threshold = 200.0;

inline bool sse_field_ok(const StochasticField& field) {
    const std::size_t half = field.table.size() / 2;
    for (std::size_t j = 0; j <= half; ++j) {
        const double re = field.table[j].real();
        if (!std::isfinite(re) || std::abs(re) > sse_flag_threshold) return false;
    }
    return true;
}

// Integrates i dPhi/dt = V(t) Phi with
//   V(t) = (H sin vt / 2) * [[0, e^-h, -e^h, 0], [e^{i pi a} e^h, 0, 0, -e^{-i pi a} e^h],
//                            [-e^{-i pi a} e^-h, 0, 0, e^{i pi a} e^-h], [0, -e^-h, e^h, 0]]
// and h(t) = h_s(t) - i (H/v) sin(vt), recording Phi on the grid.
// Returns false if the trajectory must be flagged.
inline bool sse_trajectory(const ModelParams& p, const StochasticField& field, const TimeGrid& grid, double tol,
                           AdaptiveRK& rk, std::vector<std::array<cplx, 4>>& out) {
    const std::size_t n = grid.n_points();
    out.resize(n);
    if (!sse_field_ok(field)) return false;

    const cplx iu(0.0, 1.0);
    const cplx ep = std::polar(1.0, pi * p.alpha); // Q1 plateau phase
    const cplx em = std::conj(ep);
    auto rhs = [&](double t, const StateVec& y, StateVec& dy) {
        const cplx hh = field.eval(t) - iu * (p.H / p.v) * std::sin(p.v * t);
        const cplx eh = std::exp(hh);
        const cplx emh = 1.0 / eh;
        const cplx c = -iu * 0.5 * p.H * std::sin(p.v * t);
        dy[0] = c * (emh * y[1] - eh * y[2]);
        dy[1] = c * (ep * eh * y[0] - em * eh * y[3]);
        dy[2] = c * (-em * emh * y[0] + ep * emh * y[3]);
        dy[3] = c * (-emh * y[1] + eh * y[2]);
    };

    StateVec y = {cplx(1.0, 0.0), cplx(0.0, 0.0), cplx(0.0, 0.0), cplx(0.0, 0.0)};
    rk.tol = tol;
    rk.dt_next = 0.0;
    const double bandwidth = std::max({p.H, p.v, double(field.M) * pi / std::max(field.t_f, 1e-300), 1.0});
    rk.dt_init = std::min(grid.dt(), 0.05 / bandwidth);

    out[0] = {y[0], y[1], y[2], y[3]};
    for (std::size_t i = 1; i < n; ++i) {
        try {
            rk.integrate(rhs, grid.t(i - 1), grid.t(i), y);
        } catch (const std::runtime_error&) {
            return false;
        }
        for (int c4 = 0; c4 < 4; ++c4)
            if (!std::isfinite(y[c4].real()) || !std::isfinite(y[c4].imag())) return false;
        out[i] = {y[0], y[1], y[2], y[3]};
    }
    return true;
}

} // namespace detail

inline std::vector<std::array<cplx, 4>> run_trajectory(const ModelParams& p, const StochasticField& field,
                                                       const TimeGrid& grid, double tol = 1e-8) {
    AdaptiveRK rk;
    std::vector<std::array<cplx, 4>> out;
    if (!detail::sse_trajectory(p, field, grid, tol, rk, out))
        throw std::runtime_error("run_trajectory: trajectory flagged (field overflow or integration failure)");
    return out;
}

struct SSEConfig {
    std::size_t M = 512;       // Fourier modes of the field covariance
    std::size_t n_traj = 10000;
    std::uint64_t seed0 = 1;   // trajectory k uses seed0 + k
    double tol = 1e-8;
    std::size_t n_workers = 1;
    bool use_Q1_plateau = true; // exact-Q1 two-field variant not implemented
    double l1 = 0.0;           // additive constant in the field covariance
};

struct SSEResult {
    SpinTrajectory spin;                    // trajectory-averaged expectation values
    std::vector<double> se_sx, se_sy, se_sz;
    std::vector<double> trace_mean, trace_se;   // Re(rho11 + rho22)
    std::vector<cplx> herm_defect;              // mean of rho12 - conj(rho21)
    std::vector<double> herm_re_se, herm_im_se;
    std::size_t n_traj = 0, n_used = 0, n_flagged = 0, M = 0;
    std::uint64_t seed0 = 0;
    bool degraded = false; // > 1% of trajectories flagged
};

// Density-matrix extraction per trajectory: rho11 = Phi1, rho22 = Phi4,
// rho12 = e^{-h} Phi2, rho21 = e^{+h} Phi3; spin components use the
// symmetrized Hermitian combinations (same mean, lower variance).
inline SSEResult average(const ModelParams& p, const TimeGrid& grid, const SSEConfig& cfg) {
    p.validate(true);
    if (p.alpha >= 0.5) throw std::invalid_argument("average: stochastic method requires alpha < 1/2");
    if (cfg.n_traj < 1) throw std::invalid_argument("average: n_traj must be at least 1");

    BathCorrelation bc{p.alpha, p.omega_c, cfg.use_Q1_plateau};
    std::vector<double> g = fourier_coefficients(bc, grid.tf, cfg.M);
    g[0] += 2.0 * cfg.l1;

    const std::size_t n = grid.n_points();
    constexpr std::size_t kBlock = 128; // fixed block size -> worker-count-independent reduction
    const std::size_t n_blocks = (cfg.n_traj + kBlock - 1) / kBlock;

    // Per-block accumulators, 12 doubles per time point:
    // sum/sumsq of (sx, sy, sz, trace, Re herm, Im herm).
    struct BlockAcc {
        std::vector<double> a;
        std::size_t used = 0, flagged = 0;
    };
    std::vector<BlockAcc> blocks(n_blocks);

    std::atomic<std::size_t> next_block{0};
    auto worker = [&]() {
        AdaptiveRK rk;
        std::vector<std::array<cplx, 4>> phi;
        for (;;) {
            const std::size_t b = next_block.fetch_add(1);
            if (b >= n_blocks) break;
            BlockAcc& acc = blocks[b];
            acc.a.assign(n * 12, 0.0);
            const std::size_t k0 = b * kBlock;
            const std::size_t k1 = std::min(cfg.n_traj, k0 + kBlock);
            for (std::size_t k = k0; k < k1; ++k) {
                auto field = sample_field(g, grid, cfg.seed0 + k);
                if (!detail::sse_trajectory(p, field, grid, cfg.tol, rk, phi)) {
                    ++acc.flagged;
                    continue;
                }
                ++acc.used;
                const cplx iu(0.0, 1.0);
                for (std::size_t i = 0; i < n; ++i) {
                    const cplx hh = field.h[i] - iu * (p.H / p.v) * std::sin(p.v * grid.t(i));
                    const cplx eh = std::exp(hh);
                    const cplx r12 = phi[i][1] / eh;
                    const cplx r21 = phi[i][2] * eh;
                    const double sx = r12.real() + r21.real();
                    const double sy = r21.imag() - r12.imag();
                    const double sz = phi[i][0].real() - phi[i][3].real();
                    const double tr = phi[i][0].real() + phi[i][3].real();
                    const cplx hd = r12 - std::conj(r21);
                    double* q = acc.a.data() + i * 12;
                    q[0] += sx;
                    q[1] += sx * sx;
                    q[2] += sy;
                    q[3] += sy * sy;
                    q[4] += sz;
                    q[5] += sz * sz;
                    q[6] += tr;
                    q[7] += tr * tr;
                    q[8] += hd.real();
                    q[9] += hd.real() * hd.real();
                    q[10] += hd.imag();
                    q[11] += hd.imag() * hd.imag();
                }
            }
        }
    };

    const std::size_t W = std::max<std::size_t>(1, cfg.n_workers);
    if (W == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < W; ++w) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    // Deterministic reduction in block order.
    std::vector<double> tot(n * 12, 0.0);
    std::size_t used = 0, flagged = 0;
    for (const auto& bk : blocks) {
        used += bk.used;
        flagged += bk.flagged;
        for (std::size_t j = 0; j < tot.size(); ++j) tot[j] += bk.a[j];
    }
    if (used == 0) throw std::runtime_error("average: all trajectories flagged");

    SSEResult res;
    res.n_traj = cfg.n_traj;
    res.n_used = used;
    res.n_flagged = flagged;
    res.M = cfg.M;
    res.seed0 = cfg.seed0;
    res.degraded = flagged * 100 > cfg.n_traj;
    res.spin.grid = grid;
    res.spin.sx.resize(n);
    res.spin.sy.resize(n);
    res.spin.sz.resize(n);
    res.se_sx.resize(n);
    res.se_sy.resize(n);
    res.se_sz.resize(n);
    res.trace_mean.resize(n);
    res.trace_se.resize(n);
    res.herm_defect.resize(n);
    res.herm_re_se.resize(n);
    res.herm_im_se.resize(n);

    const double nn = double(used);
    auto se = [nn](double s, double s2) {
        if (nn < 2) return 0.0;
        const double var = std::max(0.0, s2 - s * s / nn);
        return std::sqrt(var / (nn * (nn - 1.0)));
    };
    for (std::size_t i = 0; i < n; ++i) {
        const double* q = tot.data() + i * 12;
        res.spin.sx[i] = q[0] / nn;
        res.se_sx[i] = se(q[0], q[1]);
        res.spin.sy[i] = q[2] / nn;
        res.se_sy[i] = se(q[2], q[3]);
        res.spin.sz[i] = q[4] / nn;
        res.se_sz[i] = se(q[4], q[5]);
        res.trace_mean[i] = q[6] / nn;
        res.trace_se[i] = se(q[6], q[7]);
        res.herm_defect[i] = cplx(q[8] / nn, q[10] / nn);
        res.herm_re_se[i] = se(q[8], q[9]);
        res.herm_im_se[i] = se(q[10], q[11]);
    }
    res.spin.compute_sz_dot();
    return res;
}

} // namespace dynamo
