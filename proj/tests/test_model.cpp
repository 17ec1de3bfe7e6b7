#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <dynamo/model.hpp>

#include <cmath>
#include <vector>

using namespace dynamo;

namespace {

ModelParams params(double alpha, double wc, Cutoff c, Preparation prep = Preparation::P2) {
    ModelParams p;
    p.alpha = alpha;
    p.omega_c = wc;
    p.cutoff = c;
    p.preparation = prep;
    return p;
}

// Quadrature oracle for the kernel: K(t) = -(2/pi) Int_0^inf J(w) sin(wt) dw.
double kernel_by_quadrature(double t, const ModelParams& p) {
    const double wmax = p.cutoff == Cutoff::Hard ? p.omega_c : 40.0 * p.omega_c;
    const std::size_t n = 400000;
    const double dw = wmax / n;
    double acc = 0.0;
    for (std::size_t i = 0; i <= n; ++i) {
        const double w = i * dw;
        const double f = spectral_density(w, p) * std::sin(w * t);
        acc += (i == 0 || i == n) ? 0.5 * f : f;
    }
    return -2.0 / pi * acc * dw;
}

} // namespace

TEST_CASE("spectral density: both cutoffs") {
    auto pe = params(0.02, 100.0, Cutoff::Exponential);
    auto ph = params(0.02, 100.0, Cutoff::Hard);
    CHECK(spectral_density(0.0, pe) == 0.0);
    CHECK(spectral_density(0.0, ph) == 0.0);
    CHECK(spectral_density(100.0, pe) == doctest::Approx(2 * pi * 0.02 * 100 * std::exp(-1.0)).epsilon(1e-14));
    CHECK(spectral_density(150.0, ph) == 0.0);
    CHECK(spectral_density(99.0, ph) == doctest::Approx(2 * pi * 0.02 * 99.0).epsilon(1e-14));
    CHECK_THROWS_AS(spectral_density(-1.0, pe), std::domain_error);
}

TEST_CASE("memory kernel: closed forms vs quadrature oracle") {
    auto pe = params(0.02, 100.0, Cutoff::Exponential);
    auto ph = params(0.02, 100.0, Cutoff::Hard);
    CHECK(memory_kernel(0.0, pe) == 0.0);
    CHECK(memory_kernel(0.0, ph) == 0.0);
    CHECK(memory_kernel(0.01, pe) == doctest::Approx(-400.0).epsilon(1e-12));
    for (double t : {0.003, 0.01, 0.05, 0.2, 1.0}) {
        CHECK(memory_kernel(t, pe) == doctest::Approx(kernel_by_quadrature(t, pe)).epsilon(2e-6));
        CHECK(memory_kernel(t, ph) == doctest::Approx(kernel_by_quadrature(t, ph)).epsilon(2e-6));
    }
    // oddness
    for (double t : {0.004, 0.3, 2.0}) {
        CHECK(memory_kernel(-t, pe) == doctest::Approx(-memory_kernel(t, pe)).epsilon(1e-14));
        CHECK(memory_kernel(-t, ph) == doctest::Approx(-memory_kernel(t, ph)).epsilon(1e-14));
    }
    // asymptotic decay bound |K| <= 8 alpha / (w_c t^3) for the exponential cutoff
    for (double t : {1.0, 5.0, 20.0})
        CHECK(std::abs(memory_kernel(t, pe)) <= 8 * pe.alpha / (pe.omega_c * t * t * t) * (1 + 1e-12));
}

TEST_CASE("bath discretization: linear scheme identities") {
    auto p = params(0.02, 100.0, Cutoff::Hard);
    CHECK_THROWS_AS(discretize_bath(p, 0, 100.0), std::invalid_argument);

    auto ms = discretize_bath(p, 12, 100.0);
    REQUIRE(ms.size() == 12);
    ms.validate();
    CHECK(ms[0].omega == doctest::Approx(100.0 / 24).epsilon(1e-14));
    CHECK(ms[11].omega == doctest::Approx(100.0 * 23.0 / 24).epsilon(1e-14));
    double sum_g2_over_w = 0.0, sum_dw = 0.0;
    for (const auto& m : ms.modes) {
        CHECK(m.g * m.g == doctest::Approx(2 * p.alpha * m.omega * m.delta_omega).epsilon(1e-14));
        sum_g2_over_w += m.g * m.g / m.omega;
        sum_dw += m.delta_omega;
    }
    CHECK(sum_dw == doctest::Approx(100.0).epsilon(1e-14));
    CHECK(sum_g2_over_w == doctest::Approx(2 * p.alpha * 100.0).epsilon(1e-12));

    auto p0 = params(0.0, 100.0, Cutoff::Hard);
    for (const auto& m : discretize_bath(p0, 5, 50.0).modes) CHECK(m.g == 0.0);
}

TEST_CASE("kernel consistency: mode-sum kernel vs explicit summation") {
    auto p = params(0.05, 100.0, Cutoff::Hard);
    auto ms = discretize_bath(p, 37, 100.0);
    for (double t : {0.0, 0.013, 0.4, 2.7}) {
        double ref = 0.0;
        for (const auto& m : ms.modes) ref -= 2.0 * m.g * m.g * std::sin(m.omega * t);
        CHECK(memory_kernel(t, ms) == doctest::Approx(ref).epsilon(1e-12));
    }
}

TEST_CASE("induced field: zero source leaves only the free term") {
    auto p = params(0.02, 100.0, Cutoff::Exponential, Preparation::P1);
    SpinTrajectory traj;
    traj.grid = TimeGrid(0.0, 1.0, 2000);
    traj.sz.assign(traj.grid.n_points(), 0.0);
    auto h = induced_field_from_sz(traj, p);
    for (std::size_t i = 0; i < h.h_total.size(); i += 100) {
        const double t = traj.grid.t(i);
        CHECK(h.h_total[i] == doctest::Approx(-2 * p.alpha * p.omega_c / (1 + p.omega_c * p.omega_c * t * t))
                                  .epsilon(1e-12));
    }
    p.preparation = Preparation::P2;
    auto h2 = induced_field_from_sz(traj, p);
    for (double x : h2.h_total) CHECK(x == 0.0);

    SpinTrajectory empty;
    CHECK_THROWS_AS(induced_field_from_sz(empty, p), std::invalid_argument);
}

TEST_CASE("induced field: constant spin approaches the adiabatic value") {
    auto p = params(0.03, 100.0, Cutoff::Exponential, Preparation::P2);
    SpinTrajectory traj;
    traj.grid = TimeGrid(0.0, 2.0, 40000);
    traj.sz.assign(traj.grid.n_points(), 1.0); // S0 = 1/2
    auto h = induced_field_from_sz(traj, p);
    // late times: h -> -4 a w_c S0 + h_free(t); the free part is tiny by t = 2
    CHECK(h.h_total.back() == doctest::Approx(-2 * p.alpha * p.omega_c).epsilon(1e-3));
}

TEST_CASE("induced field: one resonant mode reproduces the secular-growth form") {
    const double v = 0.04, g = 0.02;
    ModeSet ms;
    ms.modes = {Mode{v, g, 0.0}};
    SpinTrajectory traj;
    traj.grid = TimeGrid(0.0, 3 * pi / v, 6000);
    traj.sz.resize(traj.grid.n_points());
    for (std::size_t i = 0; i < traj.sz.size(); ++i) traj.sz[i] = std::cos(v * traj.grid.t(i));
    auto h = induced_field_from_sz(traj, ms, Preparation::P1);
    for (std::size_t i = 0; i < h.h_total.size(); i += 250) {
        const double t = traj.grid.t(i);
        const double ref = -0.5 * g * g * t * std::sin(v * t) - g * g / v * std::cos(v * t);
        CHECK(h.h_total[i] == doctest::Approx(ref).epsilon(5e-5).scale(g * g / v));
    }
}

TEST_CASE("field decomposition: identity, zero-coupling limit, sign of the h_dyn integral") {
    auto p = params(0.02, 100.0, Cutoff::Exponential, Preparation::P2);
    const double v = 0.04;
    p.v = v;
    SpinTrajectory traj;
    traj.grid = TimeGrid(0.0, pi / v, 4000);
    traj.sz.resize(traj.grid.n_points());
    traj.sx.assign(traj.grid.n_points(), 0.0);
    traj.sy.assign(traj.grid.n_points(), 0.0);
    for (std::size_t i = 0; i < traj.sz.size(); ++i) traj.sz[i] = std::cos(v * traj.grid.t(i));
    auto f = decompose_field_continuum(traj, p);
    for (std::size_t i = 0; i < f.h_total.size(); i += 123)
        CHECK(f.h_total[i] == doctest::Approx(f.h_free[i] + f.h_ad[i] + f.h_dyn[i]).epsilon(1e-14));

    // Int_0^{pi/v} h_dyn dt = a pi [sz] = -2 a pi C_dyn with C_dyn = (sz(0)-sz(pi/v))/2 = 1.
    double I = 0.0;
    const double dt = traj.grid.dt();
    for (std::size_t i = 1; i < f.h_dyn.size(); ++i) I += 0.5 * dt * (f.h_dyn[i - 1] + f.h_dyn[i]);
    CHECK(I == doctest::Approx(-2 * p.alpha * pi).epsilon(1e-4));

    auto p0 = params(0.0, 100.0, Cutoff::Exponential, Preparation::P2);
    auto f0 = decompose_field_continuum(traj, p0);
    for (std::size_t i = 0; i < f0.h_total.size(); i += 400) CHECK(f0.h_total[i] == 0.0);

    auto ph = params(0.02, 100.0, Cutoff::Hard);
    CHECK_THROWS_AS(decompose_field_continuum(traj, ph), std::invalid_argument);
}

TEST_CASE("continuum limit: discretized convolution converges to h_ad + h_dyn") {
    const double v = 0.04, alpha = 0.02, wmax = 100.0;
    auto p = params(alpha, wmax, Cutoff::Exponential, Preparation::P2);
    p.v = v;
    SpinTrajectory traj;
    traj.grid = TimeGrid(0.0, 2.5, 5000);
    traj.sz.resize(traj.grid.n_points());
    for (std::size_t i = 0; i < traj.sz.size(); ++i) traj.sz[i] = std::cos(v * traj.grid.t(i));
    auto ref = decompose_field_continuum(traj, p);

    auto ph = params(alpha, wmax, Cutoff::Hard, Preparation::P2);
    double prev_dev = 1e300;
    for (std::size_t n_modes : {50, 100, 200}) {
        auto ms = discretize_bath(ph, n_modes, wmax);
        auto h = induced_field_from_sz(traj, ms, Preparation::P2);
        double dev = 0.0;
        for (std::size_t i = 0; i < h.h_total.size(); ++i) {
            const double t = traj.grid.t(i);
            if (t < 0.5) continue; // skip the free-field transient window
            dev = std::max(dev, std::abs(h.h_total[i] - (ref.h_ad[i] + ref.h_dyn[i])));
        }
        CHECK(dev < prev_dev);
        prev_dev = dev;
    }
    CHECK(prev_dev < 0.02 * 2 * alpha * wmax); // within 2% of the adiabatic field scale
}
