#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <dynamo/presets.hpp>
#include <dynamo/runner.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace dynamo;
namespace fs = std::filesystem;

namespace {
std::string slurp(const fs::path& p) {
    std::ifstream f(p);
    REQUIRE(bool(f));
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}
} // namespace

TEST_CASE("config parsing: sections, comments, errors, unknown keys") {
    auto kv = KeyValues::parse("solver = niba # top level goes to [run]\n"
                               "[model]\nalpha = 0.1\nv = 0.3\n\n; comment\n[grid]\ntf = 5\nn_steps = 10\n");
    CHECK(kv.kv.at("run.solver") == "niba");
    CHECK(kv.kv.at("model.alpha") == "0.1");
    auto e = ExperimentConfig::from_keyvalues(kv);
    CHECK(e.solver == Solver::NIBA);
    CHECK(e.model.alpha == 0.1);
    CHECK(e.grid.n_steps == 10);

    CHECK_THROWS_AS(KeyValues::parse("[model\nalpha = 1\n"), ConfigError);
    CHECK_THROWS_AS(KeyValues::parse("just words\n"), ConfigError);

    // a validation error names every offending key
    auto bad = KeyValues::parse("[run]\nsolver = warp\n[model]\nalpha = fast\n[grid]\ntypo = 1\n");
    try {
        ExperimentConfig::from_keyvalues(bad);
        FAIL("expected ConfigError");
    } catch (const ConfigError& ex) {
        const std::string msg = ex.what();
        CHECK(msg.find("run.solver") != std::string::npos);
        CHECK(msg.find("model.alpha") != std::string::npos);
        CHECK(msg.find("grid.typo") != std::string::npos);
    }
}

TEST_CASE("config hash: stable under key reordering, sensitive to values") {
    auto a = KeyValues::parse("[model]\nalpha = 0.1\nv = 0.3\n[run]\nsolver = niba\n");
    auto b = KeyValues::parse("[run]\nsolver = niba\n[model]\nv = 0.3\nalpha = 0.1\n");
    CHECK(a.hash_hex() == b.hash_hex());
    auto c = a;
    c.set("model.alpha", "0.2");
    CHECK(a.hash_hex() != c.hash_hex());
    CHECK(a.hash_hex().size() == 16);
}

TEST_CASE("sweep validation and expansion") {
    auto base = KeyValues::parse("[run]\nsolver = niba\n[model]\nalpha = 0.1\nv = 0.3\n"
                                 "[grid]\ntf = 5\nn_steps = 10\n");
    auto one = base;
    one.set("sweep.parameter", "model.alpha");
    one.set("sweep.values", "0.1, 0.2");
    auto e1 = ExperimentConfig::from_keyvalues(one);
    auto pts = expand_sweep(e1);
    REQUIRE(pts.size() == 2);
    CHECK(pts[0].label == "point_000_model.alpha=0.1");
    CHECK(pts[1].config.kv.at("model.alpha") == "0.2");

    auto two = one;
    two.set("sweep.parameter2", "model.v");
    two.set("sweep.values2", "0.3, 0.5, 1.0");
    CHECK(expand_sweep(ExperimentConfig::from_keyvalues(two)).size() == 6);

    // empty value list is a validation error
    auto empty = base;
    empty.set("sweep.parameter", "model.alpha");
    empty.set("sweep.values", "");
    CHECK_THROWS_AS(ExperimentConfig::from_keyvalues(empty), ConfigError);
}

TEST_CASE("presets all parse, validate and declare exactly one solver") {
    const auto names = preset_names();
    CHECK(names.size() == 12);
    for (const auto& name : names) {
        auto e = ExperimentConfig::from_keyvalues(preset_config(name));
        CHECK(e.grid.tf > e.grid.t0);
        for (const auto& ax : e.sweeps) CHECK(!ax.values.empty());
    }
    CHECK(ExperimentConfig::from_keyvalues(preset_config("fig2a")).solver == Solver::ED);
    CHECK(ExperimentConfig::from_keyvalues(preset_config("fig5")).solver == Solver::SSE);
    CHECK(ExperimentConfig::from_keyvalues(preset_config("fig6ab")).sweeps.size() == 2);
    CHECK_THROWS_AS(preset_config("fig99"), ConfigError);
}

TEST_CASE("compare_series metrics") {
    const double H = 1.0, v = 0.3;
    TimeGrid g(0.0, 10.0, 500);
    std::vector<double> a(g.n_points()), b(g.n_points());
    for (std::size_t i = 0; i < a.size(); ++i) {
        a[i] = free_spin(g.t(i), H, v).sz;
        b[i] = free_spin(g.t(i) + g.dt(), H, v).sz; // shifted by one step
    }
    CHECK(compare_series(a, a, CompareMetric::MaxAbs) == 0.0);
    CHECK(compare_series(a, a, CompareMetric::RMS) == 0.0);
    CHECK(compare_series(a, a, CompareMetric::RelAtMarks) == 0.0);
    // shifted series: max-abs ~ max|ds/dt| * dt; |ds/dt| <= Omega for a Bloch vector
    const double Om = std::sqrt(H * H + v * v);
    const double d = compare_series(a, b, CompareMetric::MaxAbs);
    CHECK(d <= Om * g.dt() * 1.05);
    CHECK(d >= 0.3 * Om * g.dt()); // and the bound is approached for this rotation
    CHECK(compare_series(a, b, CompareMetric::RMS) <= d);
    CHECK_THROWS_AS(compare_series(a, std::vector<double>{1.0}, CompareMetric::RMS), std::invalid_argument);
}

TEST_CASE("run: single analytic point emits listed files, bit-exact on re-run") {
    const fs::path out1 = fs::temp_directory_path() / "dynamo_h_a1";
    const fs::path out2 = fs::temp_directory_path() / "dynamo_h_a2";
    fs::remove_all(out1);
    fs::remove_all(out2);
    auto kv = KeyValues::parse("[run]\nsolver = analytic\n[model]\nalpha = 0.1\nv = 0.04\n"
                               "[grid]\ntf = 10\nn_steps = 40\n[bath]\nkind = one_mode\nomega = 0.04\ng = 0.02\n");
    kv.set("run.out_dir", out1.string());
    auto man1 = run(ExperimentConfig::from_keyvalues(kv));
    CHECK(man1.all_ok());
    REQUIRE(man1.runs.size() == 1);
    for (const auto& f : man1.runs[0].files) CHECK(fs::exists(out1 / f));
    CHECK(fs::exists(out1 / "manifest.json"));
    CHECK(man1.config_hash == kv.hash_hex());

    kv.set("run.out_dir", out2.string());
    auto man2 = run(ExperimentConfig::from_keyvalues(kv));
    for (const auto& f : man1.runs[0].files)
        CHECK(slurp(out1 / f) == slurp(out2 / f)); // deterministic output bytes
    fs::remove_all(out1);
    fs::remove_all(out2);
}

TEST_CASE("run: sweep continues past a failing point and records it") {
    const fs::path out = fs::temp_directory_path() / "dynamo_h_sweep";
    fs::remove_all(out);
    auto kv = KeyValues::parse("[run]\nsolver = niba\nworkers = 2\n[model]\nalpha = 0.05\nv = 0.3\n"
                               "[grid]\ntf = 5\nn_steps = 60\n"
                               "[sweep]\nparameter = model.alpha\nvalues = 0.05, -1, 0.1\n");
    kv.set("run.out_dir", out.string());
    auto man = run(ExperimentConfig::from_keyvalues(kv));
    REQUIRE(man.runs.size() == 3);
    CHECK_FALSE(man.all_ok());
    CHECK(man.runs[0].ok);
    CHECK_FALSE(man.runs[1].ok);
    CHECK(man.runs[1].message.find("alpha") != std::string::npos);
    CHECK(man.runs[2].ok);
    CHECK(fs::exists(out / man.runs[2].files[0]));

    // the manifest lists every emitted file
    const std::string mj = slurp(out / "manifest.json");
    for (const auto& r : man.runs)
        for (const auto& f : r.files) CHECK(mj.find(f) != std::string::npos);
    fs::remove_all(out);
}

TEST_CASE("run: gkls and sse points write their solver outputs") {
    const fs::path out = fs::temp_directory_path() / "dynamo_h_solvers";
    fs::remove_all(out);

    auto kg = KeyValues::parse("[run]\nsolver = gkls\n[model]\nalpha = 0.02\nv = 0.3\n"
                               "[grid]\ntf = 10\nn_steps = 50\n[gkls]\ninit = orbit\n");
    kg.set("run.out_dir", (out / "g").string());
    auto mg = run(ExperimentConfig::from_keyvalues(kg));
    REQUIRE(mg.all_ok());
    CHECK(fs::exists(out / "g" / "gkls.csv"));
    const std::string sc = slurp(out / "g" / "gkls_scalars.csv");
    CHECK(sc.find("gamma_relax") != std::string::npos);
    CHECK(sc.find("eta_longtime") != std::string::npos);

    auto ks = KeyValues::parse("[run]\nsolver = sse\n[model]\nalpha = 0.05\nv = 0.3\n"
                               "[grid]\ntf = 5\nn_steps = 50\n[sse]\nn_traj = 64\nM = 64\nseed = 7\n");
    ks.set("run.out_dir", (out / "s").string());
    auto msr = run(ExperimentConfig::from_keyvalues(ks));
    REQUIRE(msr.all_ok());
    const std::string head = slurp(out / "s" / "sse.csv").substr(0, 60);
    CHECK(head.find("se_sx") != std::string::npos); // standard-error columns present
    CHECK(fs::exists(out / "s" / "energy.csv"));

    // identical seed reproduces the stochastic CSV bit-exactly
    ks.set("run.out_dir", (out / "s2").string());
    run(ExperimentConfig::from_keyvalues(ks));
    CHECK(slurp(out / "s" / "sse.csv") == slurp(out / "s2" / "sse.csv"));
    fs::remove_all(out);
}

TEST_CASE("run: ed point emits the full ledger with pinned column order") {
    const fs::path out = fs::temp_directory_path() / "dynamo_h_ed";
    fs::remove_all(out);
    auto kv = KeyValues::parse("[run]\nsolver = ed\n[model]\nv = 0.3\npreparation = P1\n"
                               "[grid]\ntf = 10.471975511965977\nn_steps = 100\n" // pi/v
                               "[bath]\nkind = one_mode\nomega = 0.3\ng = 0.05\n");
    kv.set("run.out_dir", out.string());
    auto man = run(ExperimentConfig::from_keyvalues(kv));
    REQUIRE(man.all_ok());
    std::ifstream f(out / "ledger.csv");
    std::string header;
    std::getline(f, header);
    CHECK(header == "t,W_dr,E_S,E_dis,E_dyn,E_fluct,E_fluct_bath,E_fluct_int,E_fluct_spin,E_int,Q_R,W_R");
    const std::string sc = slurp(out / "scalars.csv");
    CHECK(sc.find("C_dyn") != std::string::npos);
    CHECK(sc.find("eta") != std::string::npos);
    fs::remove_all(out);
}
