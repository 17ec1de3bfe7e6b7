#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <dynamo/analytic.hpp>
#include <dynamo/ed.hpp>
#include <dynamo/model.hpp>

#include <cmath>

using namespace dynamo;

namespace {

ModeSet one_mode(double omega, double g) {
    ModeSet ms;
    ms.modes = {Mode{omega, g, 0.0}};
    return ms;
}

ModelParams base_params(Preparation prep, double v = 0.04) {
    ModelParams p;
    p.H = 1.0;
    p.v = v;
    p.preparation = prep;
    return p;
}

} // namespace

TEST_CASE("prepare_state: vacuum and displaced-vacuum moments") {
    auto p = base_params(Preparation::P2);
    const double w = 2.0, g = 0.8;
    auto ms = one_mode(w, g);
    FockTruncation tr{{10}};

    auto st = prepare_state(p, ms, tr);
    REQUIRE(st.psi.size() == 2 * 11);
    CHECK(st.psi[0] == cplx(1.0, 0.0));
    auto res = propagate(st, p, ms, TimeGrid(0.0, 1e-4, 1), 1e-10);
    CHECK(std::abs(res.bath.b[0][0]) < 1e-12);
    CHECK(res.bath.n[0][0] < 1e-12);

    p.preparation = Preparation::P1;
    st = prepare_state(p, ms, tr);
    res = propagate(st, p, ms, TimeGrid(0.0, 1e-4, 1), 1e-10);
    CHECK(res.bath.b[0][0].real() == doctest::Approx(-g / (2 * w)).epsilon(1e-10));
    CHECK(res.bath.b[0][0].imag() == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(res.bath.n[0][0] == doctest::Approx(g * g / (4 * w * w)).epsilon(1e-10));
    auto h0 = measure_field(res.bath, ms);
    CHECK(h0.h_total[0] == doctest::Approx(-g * g / w).epsilon(1e-10));

    // truncation far too small for the displacement -> preparation error
    auto heavy = one_mode(0.05, 1.0); // |beta| = 10
    CHECK_THROWS_AS(prepare_state(p, heavy, FockTruncation{{5}}), std::runtime_error);
}

TEST_CASE("prepare_state: basis ordering is spin-major, mode 0 slowest") {
    auto p = base_params(Preparation::P1);
    ModeSet ms;
    ms.modes = {Mode{1.0, 0.6, 0.0}, Mode{3.0, 0.9, 0.0}};
    FockTruncation tr{{8, 10}};
    auto st = prepare_state(p, ms, tr);
    const std::size_t d1 = 11; // N_1 + 1 (fastest axis)
    auto coh = [](double beta, std::size_t n) {
        double a = std::exp(-beta * beta / 2.0);
        for (std::size_t m = 1; m <= n; ++m) a *= beta / std::sqrt((double)m);
        return a;
    };
    const double b0 = -0.6 / 2.0, b1 = -0.9 / 6.0;
    for (std::size_t n0 : {0u, 2u, 5u})
        for (std::size_t n1 : {0u, 1u, 7u})
            CHECK(st.psi[n0 * d1 + n1].real() == doctest::Approx(coh(b0, n0) * coh(b1, n1)).epsilon(1e-12));
    // spin-down block is empty
    for (std::size_t i = st.psi.size() / 2; i < st.psi.size(); ++i) CHECK(std::abs(st.psi[i]) == 0.0);
}

TEST_CASE("propagate: zero coupling reproduces the free-spin closed forms") {
    auto p = base_params(Preparation::P2, 0.3);
    auto ms = one_mode(1.0, 0.0);
    FockTruncation tr{{1}};
    auto st = prepare_state(p, ms, tr);
    TimeGrid grid(0.0, 3 * 2 * pi / p.v, 600); // three drive periods
    auto res = propagate(st, p, ms, grid, 1e-11);
    for (std::size_t i = 0; i < grid.n_points(); i += 7) {
        auto b = free_spin(grid.t(i), p.H, p.v);
        CHECK(std::abs(res.spin.sx[i] - b.sx) < 1e-8);
        CHECK(std::abs(res.spin.sy[i] - b.sy) < 1e-8);
        CHECK(std::abs(res.spin.sz[i] - b.sz) < 1e-8);
    }
    CHECK(res.truncation_ok);
    for (double nn : res.norm) CHECK(std::abs(nn - 1.0) < 1e-9);

    // slow drive: spin follows the field orientation up to the O(v/H) wobble
    auto ps = base_params(Preparation::P2, 0.01);
    auto res2 = propagate(prepare_state(ps, ms, tr), ps, ms, TimeGrid(0.0, 300.0, 100), 1e-10);
    for (std::size_t i = 0; i < res2.spin.sz.size(); i += 11)
        CHECK(std::abs(res2.spin.sz[i] - std::cos(ps.v * res2.spin.grid.t(i))) < 1.5 * ps.v / ps.H);
}

TEST_CASE("propagate: resonant weak coupling matches the secular-growth field") {
    auto p = base_params(Preparation::P1);
    const double g = 0.02, v = p.v;
    auto ms = one_mode(v, g);
    FockTruncation tr{{30}};
    auto st = prepare_state(p, ms, tr);
    TimeGrid grid(0.0, 2 * pi / v, 800);
    auto res = propagate(st, p, ms, grid, 1e-10);
    CHECK(res.truncation_ok);

    auto h = measure_field(res.bath, ms);
    const double scale = 0.5 * g * g * grid.tf + g * g / v; // envelope of the reference
    for (std::size_t i = 0; i < grid.n_points(); i += 13) {
        const double t = grid.t(i);
        const double ref = -0.5 * g * g * t * std::sin(v * t) - g * g / v * std::cos(v * t);
        CHECK(std::abs(h.h_total[i] - ref) < 0.05 * scale);
    }

    // Heisenberg consistency: d<sz>/dt = -H sin(vt) <sy>
    SpinTrajectory sp = res.spin;
    for (std::size_t i = 1; i + 1 < sp.sz.size(); i += 17) {
        const double lhs = sp.sz_dot[i];
        const double rhs = -p.H * std::sin(v * sp.grid.t(i)) * sp.sy[i];
        CHECK(std::abs(lhs - rhs) < 5e-3);
    }
}

TEST_CASE("field reconstruction identity on a two-mode run") {
    auto p = base_params(Preparation::P1, 0.3);
    ModeSet ms;
    ms.modes = {Mode{0.7, 0.15, 0.0}, Mode{2.3, 0.25, 0.0}};
    FockTruncation tr{{14, 12}};
    auto st = prepare_state(p, ms, tr);
    TimeGrid grid(0.0, 30.0, 3000);
    auto res = propagate(st, p, ms, grid, 1e-10);
    CHECK(res.truncation_ok);
    auto h_meas = measure_field(res.bath, ms);
    auto h_conv = induced_field_from_sz(res.spin, ms, p.preparation);
    for (std::size_t i = 0; i < grid.n_points(); ++i)
        CHECK(std::abs(h_meas.h_total[i] - h_conv.h_total[i]) < 1e-5);
}

TEST_CASE("frozen-spin limit: polarization locked, induced field constant") {
    auto p = base_params(Preparation::P1);
    const double w = 1.0, g = std::sqrt(20.0); // g^2/omega = 20 H
    auto ms = one_mode(w, g);
    auto tr = auto_truncation(ms, 1e-14, 1.2, 8);
    auto st = prepare_state(p, ms, tr);
    TimeGrid grid(0.0, pi / p.v, 600);
    auto res = propagate(st, p, ms, grid, 1e-9);
    CHECK(res.truncation_ok);
    auto h = measure_field(res.bath, ms);
    const double plateau = -g * g / w;
    for (std::size_t i = 0; i < grid.n_points(); ++i) {
        CHECK(std::abs(res.spin.sz[i] - 1.0) <= 0.05);
        CHECK(std::abs(h.h_total[i] - plateau) <= 0.05 * std::abs(plateau));
    }
}
