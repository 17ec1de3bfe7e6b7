#pragma once
// Experiment orchestration: dispatch one config to its solver, expand sweep
// axes into a point grid, fan points out over worker threads, and record a
// JSON manifest listing every emitted file with its run status.

#include <atomic>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "analytic.hpp"
#include "config.hpp"
#include "csv.hpp"
#include "ed.hpp"
#include "energetics.hpp"
#include "gkls.hpp"
#include "model.hpp"
#include "niba.hpp"
#include "sse.hpp"

namespace dynamo {

enum class CompareMetric { MaxAbs, RMS, RelAtMarks };

// Deterministic scalar distance between two equally sampled series.
inline double compare_series(const std::vector<double>& a, const std::vector<double>& b, CompareMetric m) {
    if (a.size() != b.size() || a.empty())
        throw std::invalid_argument("compare_series: series must be non-empty and equally sized");
    const std::size_t n = a.size();
    switch (m) {
        case CompareMetric::MaxAbs: {
            double d = 0.0;
            for (std::size_t i = 0; i < n; ++i) d = std::max(d, std::abs(a[i] - b[i]));
            return d;
        }
        case CompareMetric::RMS: {
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
            return std::sqrt(s / static_cast<double>(n));
        }
        case CompareMetric::RelAtMarks: {
            double d = 0.0;
            for (std::size_t q = 1; q <= 4; ++q) {
                const std::size_t i = std::min(n - 1, q * n / 4);
                d = std::max(d, std::abs(a[i] - b[i]) / std::max({std::abs(a[i]), std::abs(b[i]), 1e-12}));
            }
            return d;
        }
    }
    return 0.0;
}

struct RunOutcome {
    std::string label;
    bool ok = false;
    std::string message;
    std::vector<std::string> files; // paths relative to the output directory
};

struct RunManifest {
    std::string config_hash;
    std::string code_version = "1.0.0";
    std::string started, finished;
    std::vector<RunOutcome> runs;

    bool all_ok() const {
        for (const auto& r : runs)
            if (!r.ok) return false;
        return true;
    }

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["config_hash"] = config_hash;
        j["code_version"] = code_version;
        j["started"] = started;
        j["finished"] = finished;
        j["runs"] = nlohmann::json::array();
        for (const auto& r : runs)
            j["runs"].push_back({{"label", r.label}, {"status", r.ok ? "ok" : "failed"},
                                 {"message", r.message}, {"files", r.files}});
        return j;
    }
};

namespace detail {

inline std::string utc_timestamp() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

inline std::string format_param_value(double x) {
    std::ostringstream os;
    os.precision(12);
    os << x;
    return os.str();
}

inline void write_scalars(const std::filesystem::path& path, const std::vector<std::pair<std::string, double>>& rows) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path.string());
    f << "name,value\n";
    for (const auto& [k, v] : rows) f << k << "," << csv::format_value(v) << "\n";
}

inline ModeSet build_modes(const ExperimentConfig& e) {
    if (e.bath_kind == BathKind::OneMode) {
        double g = e.mode_g;
        if (e.g2_over_omega >= 0.0) g = std::sqrt(e.g2_over_omega * e.mode_omega);
        ModeSet ms;
        ms.modes.push_back(Mode{e.mode_omega, g, 0.0});
        return ms;
    }
    if (e.bath_kind == BathKind::Continuum) return discretize_bath(e.model, e.n_modes, e.omega_max);
    throw ConfigError("solver ed requires bath.kind = one_mode or continuum");
}

inline std::vector<std::string> run_ed(const ExperimentConfig& e, const std::filesystem::path& dir) {
    const ModeSet ms = build_modes(e);
    FockTruncation tr;
    if (e.truncations.empty()) tr = auto_truncation(ms);
    else {
        tr.N = e.truncations;
        tr.validate(ms.size());
    }
    JointState st = prepare_state(e.model, ms, tr);
    EDResult res = propagate(std::move(st), e.model, ms, e.grid, e.ed_tol);

    std::vector<std::string> files;
    csv::Table spin;
    spin.add_column("t", e.grid.times());
    spin.add_column("sx", res.spin.sx);
    spin.add_column("sy", res.spin.sy);
    spin.add_column("sz", res.spin.sz);
    spin.write_file((dir / "spin.csv").string());
    files.push_back("spin.csv");

    const FieldTrajectory field = measure_field(res.bath, ms);
    csv::Table ft;
    ft.add_column("t", e.grid.times());
    ft.add_column("h", field.h_total);
    ft.write_file((dir / "field.csv").string());
    files.push_back("field.csv");

    csv::Table bt;
    bt.add_column("t", e.grid.times());
    for (std::size_t k = 0; k < ms.size(); ++k) {
        std::vector<double> re(res.bath.b.size()), im(res.bath.b.size()), occ(res.bath.b.size());
        for (std::size_t i = 0; i < res.bath.b.size(); ++i) {
            re[i] = res.bath.b[i][k].real();
            im[i] = res.bath.b[i][k].imag();
            occ[i] = res.bath.n[i][k];
        }
        const std::string sk = std::to_string(k);
        bt.add_column("re_b_" + sk, re);
        bt.add_column("im_b_" + sk, im);
        bt.add_column("n_" + sk, occ);
    }
    bt.write_file((dir / "bath.csv").string());
    files.push_back("bath.csv");

    EnergyLedger led = build_ledger(res.spin, res.bath, ms, e.model, res.W_dr);
    led.to_table().write_file((dir / "ledger.csv").string());
    files.push_back("ledger.csv");

    std::vector<std::pair<std::string, double>> sc = {
        {"eta", led.eta}, {"eta_M", led.eta_M}, {"C", led.C}, {"C_dyn", led.C_dyn},
        {"W_dr_final", led.W_dr.back()}, {"dE_dyn", led.E_dyn.back() - led.E_dyn.front()},
        {"power", (led.E_dyn.back() - led.E_dyn.front()) / (e.grid.tf - e.grid.t0)},
        {"truncation_ok", res.truncation_ok ? 1.0 : 0.0}};
    if (std::isfinite(led.C_dyn) && ms.size() == 1)
        sc.emplace_back("dE_dyn_predicted", dyn_energy_from_chern_one_mode(ms[0].g, e.model.v, led.C_dyn));
    write_scalars(dir / "scalars.csv", sc);
    files.push_back("scalars.csv");
    if (!res.truncation_ok) throw std::runtime_error("ed: occupation audit failed: " + res.message);
    return files;
}

inline std::vector<std::string> run_sse(const ExperimentConfig& e, const std::filesystem::path& dir) {
    SSEConfig cfg;
    cfg.M = e.sse_M;
    cfg.n_traj = e.sse_n_traj;
    cfg.seed0 = e.sse_seed;
    cfg.tol = e.sse_tol;
    cfg.n_workers = e.sse_workers;
    cfg.l1 = e.sse_l1;
    SSEResult res = average(e.model, e.grid, cfg);

    std::vector<std::string> files;
    csv::Table t;
    t.add_column("t", e.grid.times());
    t.add_column("sx", res.spin.sx);
    t.add_column("se_sx", res.se_sx);
    t.add_column("sy", res.spin.sy);
    t.add_column("se_sy", res.se_sy);
    t.add_column("sz", res.spin.sz);
    t.add_column("se_sz", res.se_sz);
    t.add_column("trace", res.trace_mean);
    t.add_column("se_trace", res.trace_se);
    t.write_file((dir / "sse.csv").string());
    files.push_back("sse.csv");

    csv::Table en;
    en.add_column("t", e.grid.times());
    const std::vector<double> W = work_drive(res.spin, e.model);
    const std::vector<double> Ed = dynamo_energy_continuum(res.spin, e.model);
    en.add_column("W_dr", W);
    en.add_column("E_dyn", Ed);
    en.write_file((dir / "energy.csv").string());
    files.push_back("energy.csv");

    std::vector<std::pair<std::string, double>> sc = {
        {"n_traj", static_cast<double>(res.n_traj)}, {"n_used", static_cast<double>(res.n_used)},
        {"n_flagged", static_cast<double>(res.n_flagged)}, {"seed0", static_cast<double>(res.seed0)},
        {"M", static_cast<double>(res.M)}, {"degraded", res.degraded ? 1.0 : 0.0},
        {"W_dr_final", W.back()}, {"dE_dyn", Ed.back() - Ed.front()},
        {"power", (Ed.back() - Ed.front()) / (e.grid.tf - e.grid.t0)},
        {"eta", efficiency_at(Ed.back() - Ed.front(), W.back())}};
    write_scalars(dir / "scalars.csv", sc);
    files.push_back("scalars.csv");
    return files;
}

inline std::vector<std::string> run_niba(const ExperimentConfig& e, const std::filesystem::path& dir) {
    const SpinTrajectory s = solve_niba(e.model, e.grid);
    csv::Table t;
    t.add_column("t", e.grid.times());
    t.add_column("sx", s.sx);
    t.add_column("sy", s.sy);
    t.add_column("sz", s.sz);
    t.add_column("sz_dot", s.sz_dot);
    std::vector<double> window(e.grid.n_points());
    const double t_valid = pi / (4.0 * e.model.v); // short blips need a large z field
    for (std::size_t i = 0; i < window.size(); ++i) window[i] = e.grid.t(i) <= t_valid ? 1.0 : 0.0;
    t.add_column("in_validity_window", window);
    t.write_file((dir / "niba.csv").string());
    return {"niba.csv"};
}

inline std::vector<std::string> run_gkls(const ExperimentConfig& e, const std::filesystem::path& dir) {
    DensityMatrix2 rho0;
    if (e.gkls_init == "down") {
        rho0.r00 = 0.0;
        rho0.r11 = 1.0;
    } else if (e.gkls_init == "orbit") {
        const OrbitState o = gkls_orbit(e.grid.t0, e.model.H, e.model.v);
        rho0 = DensityMatrix2::pure(o.up, o.down);
    }
    GKLSConfig cfg;
    cfg.tol = e.gkls_tol;
    cfg.with_level_shift = e.gkls_level_shift;
    const SpinTrajectory s = propagate_gkls(rho0, e.model, e.grid, cfg);

    csv::Table t;
    t.add_column("t", e.grid.times());
    t.add_column("sx", s.sx);
    t.add_column("sy", s.sy);
    t.add_column("sz", s.sz);
    t.write_file((dir / "gkls.csv").string());

    const GKLSRates rates = build_rates(e.model, e.gkls_level_shift);
    const StationaryEnergetics se = stationary_energetics(e.model);
    write_scalars(dir / "gkls_scalars.csv",
                  {{"gamma_relax", rates.gamma_relax}, {"gamma_deph", rates.gamma_deph},
                   {"level_shift", rates.level_shift},
                   {"weak_coupling_ok", rates.weak_coupling_ok ? 1.0 : 0.0},
                   {"W_flow", se.W_flow}, {"dE_dyn_half", se.dE_dyn_half},
                   {"eta_longtime", se.eta_longtime}});
    return {"gkls.csv", "gkls_scalars.csv"};
}

inline std::vector<std::string> run_analytic(const ExperimentConfig& e, const std::filesystem::path& dir) {
    const std::size_t n = e.grid.n_points();
    std::vector<double> fx(n), fy(n), fz(n), ox(n), oy(n), oz(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = e.grid.t(i);
        const BlochVector b = free_spin(t, e.model.H, e.model.v);
        fx[i] = b.sx;
        fy[i] = b.sy;
        fz[i] = b.sz;
        const OrbitState o = gkls_orbit(t, e.model.H, e.model.v);
        ox[i] = o.bloch.sx;
        oy[i] = o.bloch.sy;
        oz[i] = o.bloch.sz;
    }
    csv::Table t;
    t.add_column("t", e.grid.times());
    t.add_column("free_sx", fx);
    t.add_column("free_sy", fy);
    t.add_column("free_sz", fz);
    t.add_column("orbit_sx", ox);
    t.add_column("orbit_sy", oy);
    t.add_column("orbit_sz", oz);
    t.write_file((dir / "analytic.csv").string());
    std::vector<std::string> files = {"analytic.csv"};

    const DynamoPredictions d = dynamo_predictions(e.model);
    std::vector<std::pair<std::string, double>> sc = {
        {"W_flow", d.W_flow}, {"dE_dyn_half", d.dE_dyn_half}, {"C_dyn_orbit", d.C_dyn_gkls}};
    if (e.model.alpha > 0.0 && e.model.alpha < 0.5) {
        KondoParams k;
        k.Delta = e.model.H;
        k.alpha = e.model.alpha;
        k.omega_c = e.model.omega_c;
        sc.emplace_back("renormalized_tunneling", renormalized_tunneling(k));
        sc.emplace_back("kondo_scale", kondo_scale(k));
        sc.emplace_back("bethe_sx", bethe_sx(k));
    }
    write_scalars(dir / "scalars.csv", sc);
    files.push_back("scalars.csv");

    if (e.bath_kind == BathKind::OneMode) {
        OneModeParams pm;
        pm.omega = e.mode_omega;
        pm.g = (e.g2_over_omega >= 0.0) ? std::sqrt(e.g2_over_omega * e.mode_omega) : e.mode_g;
        pm.H = e.model.H;
        pm.v = e.model.v;
        pm.preparation = e.model.preparation;
        std::vector<double> hw(n), hf(n), ed_(n), wd(n), ef(n);
        const bool resonant = std::abs(pm.omega - pm.v) < resonance_rel_tol * pm.v;
        for (std::size_t i = 0; i < n; ++i) {
            const double tt = e.grid.t(i);
            hw[i] = one_mode_weak_field(tt, pm);
            hf[i] = frozen_field(tt, pm);
            if (resonant) {
                const OneModeEnergies en = one_mode_energies(tt, pm);
                ed_[i] = en.E_dyn;
                wd[i] = en.W_dr;
                ef[i] = en.E_fluct;
            } else {
                ed_[i] = wd[i] = ef[i] = undefined_value(); // closed forms hold on resonance only
            }
        }
        csv::Table om;
        om.add_column("t", e.grid.times());
        om.add_column("h_weak", hw);
        om.add_column("h_frozen", hf);
        om.add_column("E_dyn", ed_);
        om.add_column("W_dr", wd);
        om.add_column("E_fluct", ef);
        om.write_file((dir / "one_mode.csv").string());
        files.push_back("one_mode.csv");
    }
    return files;
}

inline std::vector<std::string> run_point(const ExperimentConfig& e, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    switch (e.solver) {
        case Solver::ED: return run_ed(e, dir);
        case Solver::SSE: return run_sse(e, dir);
        case Solver::NIBA: return run_niba(e, dir);
        case Solver::GKLS: return run_gkls(e, dir);
        case Solver::Analytic: return run_analytic(e, dir);
    }
    throw std::logic_error("run_point: unreachable");
}

} // namespace detail

// Expand sweep axes into concrete per-point configs (Cartesian product).
struct SweepPoint {
    std::string label;
    KeyValues config;
};

inline std::vector<SweepPoint> expand_sweep(const ExperimentConfig& e) {
    std::vector<SweepPoint> points;
    if (e.sweeps.empty()) {
        points.push_back({"run", e.raw});
        return points;
    }
    std::size_t total = 1;
    for (const auto& ax : e.sweeps) total *= ax.values.size();
    for (std::size_t idx = 0; idx < total; ++idx) {
        std::size_t rem = idx;
        KeyValues kv = e.raw;
        std::string label = "point_";
        {
            std::ostringstream num;
            num.width(3);
            num.fill('0');
            num << idx;
            label += num.str();
        }
        for (std::size_t a = 0; a < e.sweeps.size(); ++a) {
            const auto& ax = e.sweeps[a];
            const std::size_t i = rem % ax.values.size();
            rem /= ax.values.size();
            const std::string val = detail::format_param_value(ax.values[i]);
            kv.set(ax.parameter, val);
            label += "_" + ax.parameter + "=" + val;
        }
        // the per-point config is concrete: drop the sweep axes before rebuild
        for (const char* suffix : {"", "2"}) {
            kv.kv.erase(std::string("sweep.parameter") + suffix);
            kv.kv.erase(std::string("sweep.values") + suffix);
        }
        points.push_back({label, std::move(kv)});
    }
    return points;
}

// Run the experiment: dispatch every sweep point (parallel up to e.workers),
// then write <out>/manifest.json and <out>/config.txt. Throws ConfigError on
// invalid input; solver failures are recorded per point and do not throw.
inline RunManifest run(const ExperimentConfig& e) {
    RunManifest man;
    man.config_hash = e.raw.hash_hex();
    man.started = detail::utc_timestamp();

    const std::filesystem::path out(e.out_dir);
    std::filesystem::create_directories(out);
    {
        std::ofstream f(out / "config.txt");
        f << e.raw.canonical();
    }

    const std::vector<SweepPoint> points = expand_sweep(e);
    man.runs.resize(points.size());

    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= points.size()) return;
            RunOutcome& r = man.runs[i];
            r.label = points[i].label;
            const std::filesystem::path dir = points.size() == 1 ? out : out / points[i].label;
            try {
                const ExperimentConfig pe = ExperimentConfig::from_keyvalues(points[i].config);
                const auto files = detail::run_point(pe, dir);
                for (const auto& f : files)
                    r.files.push_back(points.size() == 1 ? f : points[i].label + "/" + f);
                r.ok = true;
            } catch (const std::exception& ex) {
                r.ok = false;
                r.message = ex.what();
            }
        }
    };
    const std::size_t nw = std::min(e.workers, points.size());
    if (nw <= 1) worker();
    else {
        std::vector<std::thread> ts;
        for (std::size_t i = 0; i < nw; ++i) ts.emplace_back(worker);
        for (auto& t : ts) t.join();
    }

    man.finished = detail::utc_timestamp();
    std::ofstream f(out / "manifest.json");
    f << man.to_json().dump(2) << "\n";
    return man;
}

} // namespace dynamo
