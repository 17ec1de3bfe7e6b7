#pragma once
// Adaptive embedded Runge-Kutta integrator (Dormand-Prince 5(4)) on complex
// state vectors. Shared by the ED engine (matrix-free Hamiltonian action),
// the SSE trajectories and the GKLS propagator.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "types.hpp"

namespace dynamo {

using StateVec = std::vector<cplx>;

// Dormand-Prince 5(4) tableau.
namespace dp45 {
inline constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
inline constexpr double a21 = 1.0 / 5;
inline constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
inline constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
inline constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
inline constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                        a65 = -5103.0 / 18656;
inline constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
// 4th-order weights (for the error estimate).
inline constexpr double e1 = 5179.0 / 57600, e3 = 7571.0 / 16695, e4 = 393.0 / 640, e5 = -92097.0 / 339200,
                        e6 = 187.0 / 2100, e7 = 1.0 / 40;
} // namespace dp45

struct AdaptiveRK {
    double tol = 1e-9;      // local error target per step (mixed abs/rel)
    double dt_init = 1e-3;
    double dt_min = 1e-14;
    double dt_max = 1e30;
    std::size_t max_steps = 200'000'000;

    // Statistics / persistent step-size across segment calls.
    std::size_t n_accepted = 0, n_rejected = 0;
    double dt_next = 0.0;

    // Integrates dy/dt = rhs(t, y) from t0 to t1 in place. rhs(t, y, dydt)
    // must write the derivative into dydt. on_step(t_prev, t_new, y) is
    // invoked after every accepted step (used for work-integral accumulation).
    template <class RHS, class StepCb>
    void integrate(RHS&& rhs, double t0, double t1, StateVec& y, StepCb&& on_step) {
        const std::size_t n = y.size();
        if (work.size() != 8 || work[0].size() != n)
            work.assign(8, StateVec(n));
        StateVec& k1 = work[0];
        StateVec& k2 = work[1];
        StateVec& k3 = work[2];
        StateVec& k4 = work[3];
        StateVec& k5 = work[4];
        StateVec& k6 = work[5];
        StateVec& ytmp = work[6];
        StateVec& ynew = work[7];

        double t = t0;
        double dt = (dt_next > 0 ? dt_next : dt_init);
        bool have_k1 = false;
        using namespace dp45;
        while (t < t1) {
            dt = std::min({dt, t1 - t, dt_max});
            if (dt < dt_min) throw std::runtime_error("AdaptiveRK: step size underflow");
            if (n_accepted + n_rejected > max_steps) throw std::runtime_error("AdaptiveRK: step budget exceeded");

            if (!have_k1) { rhs(t, y, k1); have_k1 = true; }
            for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + dt * (a21 * k1[i]);
            rhs(t + c2 * dt, ytmp, k2);
            for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + dt * (a31 * k1[i] + a32 * k2[i]);
            rhs(t + c3 * dt, ytmp, k3);
            for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + dt * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
            rhs(t + c4 * dt, ytmp, k4);
            for (std::size_t i = 0; i < n; ++i)
                ytmp[i] = y[i] + dt * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
            rhs(t + c5 * dt, ytmp, k5);
            for (std::size_t i = 0; i < n; ++i)
                ytmp[i] = y[i] + dt * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
            rhs(t + dt, ytmp, k6);
            for (std::size_t i = 0; i < n; ++i)
                ynew[i] = y[i] + dt * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
            rhs(t + dt, ynew, ytmp); // k7 (FSAL)

            // Error estimate: 5th-order minus 4th-order solution.
            double err2 = 0.0, cnt = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const cplx e = dt * ((b1 - e1) * k1[i] + (b3 - e3) * k3[i] + (b4 - e4) * k4[i] +
                                     (b5 - e5) * k5[i] + (b6 - e6) * k6[i] - e7 * ytmp[i]);
                const double sc = tol * (1.0 + std::abs(y[i]));
                const double r = std::abs(e) / sc;
                err2 += r * r;
                cnt += 1.0;
            }
            const double err = std::sqrt(err2 / cnt);
            if (!std::isfinite(err)) throw std::runtime_error("AdaptiveRK: non-finite state encountered");

            if (err <= 1.0) {
                t += dt;
                y.swap(ynew);
                k1.swap(ytmp); // FSAL reuse
                ++n_accepted;
                on_step(t - dt, t, y);
                const double fac = std::clamp(0.9 * std::pow(std::max(err, 1e-10), -0.2), 0.2, 5.0);
                dt *= fac;
            } else {
                ++n_rejected;
                have_k1 = true; // k1 unchanged
                dt *= std::clamp(0.9 * std::pow(err, -0.2), 0.1, 1.0);
            }
        }
        dt_next = dt;
    }

    template <class RHS>
    void integrate(RHS&& rhs, double t0, double t1, StateVec& y) {
        integrate(rhs, t0, t1, y, [](double, double, const StateVec&) {});
    }

  private:
    std::vector<StateVec> work;
};

} // namespace dynamo
