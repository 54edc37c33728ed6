#pragma once

#include <functional>
#include <string>
#include <vector>

#include "slmpc/model.hpp"

namespace slmpc {

/// A registered plant together with its nominal (equilibrium) operating point.
struct PlantEntry {
    std::string name;
    std::string description;
    PlantModel model;
    Vector x_nominal;
    Vector u_nominal;
};

namespace plants {

/// Exothermic CSTR (Seborg et al.): states [C_A (mol/L), T (K)], input
/// coolant temperature T_c (K), output C_A. Time unit is minutes.
struct CstrParameters {
    double q = 100.0;       // feed flow, L/min
    double V = 100.0;       // volume, L
    double CAf = 1.0;       // feed concentration, mol/L
    double Tf = 350.0;      // feed temperature, K
    double rho = 1000.0;    // density, g/L
    double Cp = 0.239;      // heat capacity, J/(g K)
    double dH = -5.0e4;     // heat of reaction, J/mol
    double E_over_R = 8750.0;
    double k0 = 7.2e10;     // 1/min
    double UA = 5.0e4;      // J/(min K)
};

/// Stable low-conversion equilibrium at T_c = 300 K.
inline constexpr double kCstrNominalCA = 0.8772529460809678;
inline constexpr double kCstrNominalT = 324.47544343159893;
inline constexpr double kCstrNominalTc = 300.0;

PlantEntry cstr(const CstrParameters& p = {});

/// Linearized AFTI-16 aircraft (4 states, 2 elevator/flaperon inputs, outputs
/// attack and pitch angle). Open-loop unstable and ill-conditioned.
PlantEntry afti16();

/// xdot = -x/tau + (k/tau) u, y = x.
PlantEntry first_order(double tau = 1.0, double gain = 1.0);

/// Registry key -> constructor.
const std::vector<std::string>& registered_names();
bool is_registered(const std::string& name);
/// Throws std::out_of_range for an unknown name.
PlantEntry make(const std::string& name);

}  // namespace plants

}  // namespace slmpc
