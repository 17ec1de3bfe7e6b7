#pragma once
// Built-in experiment presets reproducing the figure datasets: each preset is
// plain config text so it can be dumped, edited and re-run like a user config.

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "config.hpp"

namespace dynamo {

inline const std::map<std::string, std::string>& preset_texts() {
    // grids chosen so a half period is resolved by >= 200 samples everywhere
    static const std::map<std::string, std::string> presets = {
        {"fig2a",
         "# one-mode induced field: sweep the mode frequency at fixed g^2/omega\n"
         "[run]\nsolver = ed\n"
         "[model]\nH = 1\nv = 0.04\npreparation = P1\n"
         "[grid]\nt0 = 0\ntf = 471.23889803846898\nn_steps = 1500\n" // three periods 3*2pi/v
         "[bath]\nkind = one_mode\nomega = 0.04\ng2_over_omega = 0.0025\n"
         "[sweep]\nparameter = bath.omega\nvalues = 0.02, 0.04, 0.2\n"},
        {"fig2b",
         "# resonant one-mode induced field for increasing coupling\n"
         "[run]\nsolver = ed\n"
         "[model]\nH = 1\nv = 0.04\npreparation = P1\n"
         "[grid]\nt0 = 0\ntf = 471.23889803846898\nn_steps = 1500\n"
         "[bath]\nkind = one_mode\nomega = 0.04\ng = 0.01\n"
         "[sweep]\nparameter = bath.g\nvalues = 0.01, 0.05, 0.1, 0.3\n"},
        {"fig3abc",
         "# one-mode dynamo performance at t_f = pi/v: energy, efficiency, power\n"
         "[run]\nsolver = ed\n"
         "[model]\nH = 1\nv = 0.04\npreparation = P1\n"
         "[grid]\nt0 = 0\ntf = 78.539816339744831\nn_steps = 800\n" // pi/v
         "[bath]\nkind = one_mode\nomega = 0.04\ng = 0.02\n"
         "[sweep]\nparameter = bath.g\nvalues = 0.01, 0.02, 0.04, 0.08, 0.16\n"},
        {"fig4ab",
         "# twelve-mode discretized Ohmic bath: fields, dynamo energy, efficiency\n"
         "[run]\nsolver = ed\n"
         "[model]\nH = 1\nv = 0.04\nalpha = 0.02\nomega_c = 100\ncutoff = hard\n"
         "[grid]\nt0 = 0\ntf = 235.61944901923449\nn_steps = 1200\n" // 3 pi/v
         "[bath]\nkind = continuum\nn_modes = 12\nomega_max = 100\n"
         "[ed]\ntruncations = 3, 2, 2, 2, 1, 1, 1, 1, 1, 1, 1, 1\n"},
        {"fig5",
         "# <sigma_x> at t = pi/(2v) vs coupling, quasi-adiabatic drive\n"
         "[run]\nsolver = sse\n"
         "[model]\nH = 1\nv = 0.01\nalpha = 0.1\nomega_c = 100\n"
         "[grid]\nt0 = 0\ntf = 157.07963267948966\nn_steps = 400\n" // pi/(2v)
         "[sse]\nn_traj = 10000\nM = 2048\nseed = 1\nworkers = 1\n"
         "[sweep]\nparameter = model.alpha\nvalues = 0.05, 0.1, 0.15, 0.2, 0.25, 0.3\n"},
        {"fig6ab",
         "# stochastic spin dynamics over the (alpha, v) comparison grid\n"
         "[run]\nsolver = sse\n"
         "[model]\nH = 1\nv = 0.04\nalpha = 0.01\nomega_c = 100\n"
         "[grid]\nt0 = 0\ntf = 78.539816339744831\nn_steps = 400\n"
         "[sse]\nn_traj = 10000\nM = 512\nseed = 1\nworkers = 1\n"
         "[sweep]\nparameter = model.alpha\nvalues = 0.01, 0.2\n"
         "parameter2 = model.v\nvalues2 = 0.04, 0.3, 1.0\n"},
        {"fig7",
         "# averaged output power vs efficiency across coupling strengths\n"
         "[run]\nsolver = sse\n"
         "[model]\nH = 1\nv = 0.04\nalpha = 0.05\nomega_c = 100\n"
         "[grid]\nt0 = 0\ntf = 78.539816339744831\nn_steps = 400\n"
         "[sse]\nn_traj = 10000\nM = 512\nseed = 1\nworkers = 1\n"
         "[sweep]\nparameter = model.alpha\nvalues = 0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45\n"},
        {"fig8",
         "# resonant-mode dynamo energy and dynamically measured winding vs g/v\n"
         "[run]\nsolver = ed\n"
         "[model]\nH = 1\nv = 0.04\npreparation = P1\n"
         "[grid]\nt0 = 0\ntf = 78.539816339744831\nn_steps = 800\n"
         "[bath]\nkind = one_mode\nomega = 0.04\ng = 0.02\n"
         "[sweep]\nparameter = bath.g\nvalues = 0.02, 0.04, 0.08, 0.12, 0.16, 0.24, 0.32\n"},
        {"fig9",
         "# continuum dynamo energy after a pole-to-pole drive vs coupling\n"
         "[run]\nsolver = sse\n"
         "[model]\nH = 1\nv = 0.04\nalpha = 0.05\nomega_c = 100\n"
         "[grid]\nt0 = 0\ntf = 78.539816339744831\nn_steps = 400\n"
         "[sse]\nn_traj = 10000\nM = 512\nseed = 1\nworkers = 1\n"
         "[sweep]\nparameter = model.alpha\nvalues = 0.05, 0.1, 0.2, 0.3, 0.4\n"},
        {"fig10",
         "# biased dynamo: output power vs bias-corrected efficiency\n"
         "[run]\nsolver = ed\n"
         "[model]\nH = 1\nv = 0.04\npreparation = P1\n"
         "[grid]\nt0 = 0\ntf = 78.539816339744831\nn_steps = 800\n"
         "[bath]\nkind = one_mode\nomega = 0.04\ng = 0.02\n"
         "[sweep]\nparameter = model.M\nvalues = -0.5, 0, 0.5\n"
         "parameter2 = bath.g\nvalues2 = 0.04, 0.08, 0.16, 0.32\n"},
        {"fig11",
         "# ten-mode discretized bath for cross-validation of the stochastic solver\n"
         "[run]\nsolver = ed\n"
         "[model]\nH = 1\nv = 0.04\nalpha = 0.01\nomega_c = 100\ncutoff = hard\n"
         "[grid]\nt0 = 0\ntf = 78.539816339744831\nn_steps = 400\n"
         "[bath]\nkind = continuum\nn_modes = 10\nomega_max = 100\n"
         "[ed]\ntruncations = 3, 2, 2, 1, 1, 1, 1, 1, 1, 1\n"},
        {"fig12",
         "# fluctuation-energy budget of the discretized bath (eight modes)\n"
         "[run]\nsolver = ed\n"
         "[model]\nH = 1\nv = 0.04\nalpha = 0.02\nomega_c = 100\ncutoff = hard\n"
         "[grid]\nt0 = 0\ntf = 78.539816339744831\nn_steps = 800\n"
         "[bath]\nkind = continuum\nn_modes = 8\nomega_max = 100\n"
         "[ed]\ntruncations = 4, 2, 2, 2, 1, 1, 1, 1\n"},
    };
    return presets;
}

inline std::vector<std::string> preset_names() {
    std::vector<std::string> out;
    for (const auto& [k, v] : preset_texts()) out.push_back(k);
    return out;
}

inline KeyValues preset_config(const std::string& name) {
    const auto& m = preset_texts();
    auto it = m.find(name);
    if (it == m.end()) throw ConfigError("unknown preset: " + name);
    return KeyValues::parse(it->second);
}

} // namespace dynamo
