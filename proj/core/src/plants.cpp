#include "slmpc/plants.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

namespace slmpc::plants {

namespace {

// Wraps constant matrices as an exactly linear plant with analytic Jacobians.
PlantModel linear_plant(Matrix A, Matrix B, Matrix C)
{
    PlantModel m;
    m.n_x = A.rows();
    m.n_u = B.cols();
    m.n_y = C.rows();
    m.dynamics = [A, B](std::span<const double> x, std::span<const double> u) {
        Vector dx = A * x;
        gemv_acc(B, u, 1.0, dx);
        return dx;
    };
    m.output = [C](std::span<const double> x, std::span<const double>) { return C * x; };
    const std::size_t ny = C.rows();
    const std::size_t nu = B.cols();
    m.dfdx = [A](std::span<const double>, std::span<const double>) { return A; };
    m.dfdu = [B](std::span<const double>, std::span<const double>) { return B; };
    m.dgdx = [C](std::span<const double>, std::span<const double>) { return C; };
    m.dgdu = [ny, nu](std::span<const double>, std::span<const double>) { return Matrix(ny, nu); };
    return m;
}

}  // namespace

PlantEntry cstr(const CstrParameters& p)
{
    PlantModel m;
    m.n_x = 2;
    m.n_u = 1;
    m.n_y = 1;
    const double heat = -p.dH / (p.rho * p.Cp);
    const double jacket = p.UA / (p.V * p.rho * p.Cp);
    const double dilution = p.q / p.V;
    m.dynamics = [=](std::span<const double> x, std::span<const double> u) {
        const double ca = x[0];
        const double temp = x[1];
        const double rate = p.k0 * std::exp(-p.E_over_R / temp) * ca;
        return Vector{dilution * (p.CAf - ca) - rate,
                      dilution * (p.Tf - temp) + heat * rate + jacket * (u[0] - temp)};
    };
    m.output = [](std::span<const double> x, std::span<const double>) { return Vector{x[0]}; };
    m.dfdx = [=](std::span<const double> x, std::span<const double>) {
        const double ca = x[0];
        const double temp = x[1];
        const double k = p.k0 * std::exp(-p.E_over_R / temp);
        const double dk_dT = k * p.E_over_R / (temp * temp);
        return Matrix{{-dilution - k, -dk_dT * ca},
                      {heat * k, -dilution + heat * dk_dT * ca - jacket}};
    };
    m.dfdu = [=](std::span<const double>, std::span<const double>) {
        return Matrix{{0.0}, {jacket}};
    };
    m.dgdx = [](std::span<const double>, std::span<const double>) { return Matrix{{1.0, 0.0}}; };
    m.dgdu = [](std::span<const double>, std::span<const double>) { return Matrix{{0.0}}; };

    PlantEntry e;
    e.name = "cstr";
    e.description = "exothermic CSTR, states [C_A, T], input T_c, output C_A";
    e.model = std::move(m);
    e.x_nominal = {kCstrNominalCA, kCstrNominalT};
    e.u_nominal = {kCstrNominalTc};
    return e;
}

PlantEntry afti16()
{
    Matrix A{{-0.0151, -60.5651, 0.0, -32.174},
             {-0.0001, -1.3411, 0.9929, 0.0},
             {0.00018, 43.2541, -0.86939, 0.0},
             {0.0, 0.0, 1.0, 0.0}};
    Matrix B{{-2.516, -13.136},
             {-0.1689, -0.2514},
             {-17.251, -1.5766},
             {0.0, 0.0}};
    Matrix C{{0.0, 1.0, 0.0, 0.0},
             {0.0, 0.0, 0.0, 1.0}};
    PlantEntry e;
    e.name = "afti16";
    e.description = "linearized AFTI-16 aircraft, 4 states, 2 inputs, outputs [attack, pitch]";
    e.model = linear_plant(std::move(A), std::move(B), std::move(C));
    e.x_nominal.assign(4, 0.0);
    e.u_nominal.assign(2, 0.0);
    return e;
}

PlantEntry first_order(double tau, double gain)
{
    PlantEntry e;
    e.name = "first_order";
    e.description = "first-order lag xdot = (k u - x) / tau, y = x";
    e.model = linear_plant(Matrix{{-1.0 / tau}}, Matrix{{gain / tau}}, Matrix{{1.0}});
    e.x_nominal = {0.0};
    e.u_nominal = {0.0};
    return e;
}

namespace {

const std::map<std::string, PlantEntry (*)()>& registry()
{
    static const std::map<std::string, PlantEntry (*)()> r{
        {"afti16", [] { return afti16(); }},
        {"cstr", [] { return cstr(); }},
        {"first_order", [] { return first_order(); }},
    };
    return r;
}

}  // namespace

const std::vector<std::string>& registered_names()
{
    static const std::vector<std::string> names = [] {
        std::vector<std::string> v;
        for (const auto& [k, _] : registry()) {
            v.push_back(k);
        }
        return v;
    }();
    return names;
}

bool is_registered(const std::string& name) { return registry().count(name) > 0; }

PlantEntry make(const std::string& name)
{
    const auto it = registry().find(name);
    if (it == registry().end()) {
        throw std::out_of_range("unknown plant '" + name + "'");
    }
    return it->second();
}

}  // namespace slmpc::plants
