#pragma once

#include <cstddef>

#include "slmpc/condensing.hpp"
#include "slmpc/qp.hpp"

namespace slmpc {

/// Combinatorial bound on the number of finite inequality sides (box sides
/// plus general-row sides) the enumeration oracle accepts.
inline constexpr std::size_t kOracleMaxConstraints = 20;

/// Reference QP solver for tests: enumerates every admissible active set,
/// solves its KKT system, keeps primal-feasible and dual-feasible candidates,
/// and returns the one with least objective. Equalities are always active.
/// Throws std::invalid_argument beyond kOracleMaxConstraints.
QpSolution solve_oracle_bruteforce(const DenseQp& qp);
QpSolution solve_oracle_bruteforce(const CondensedQp& qp);

/// Number of finite inequality sides, i.e. what counts against the oracle bound.
std::size_t count_inequality_sides(const DenseQp& qp);

}  // namespace slmpc
