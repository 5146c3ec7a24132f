#pragma once

#include "action.hpp"
#include "config.hpp"
#include "core.hpp"
#include "flow.hpp"
#include "grid.hpp"
#include "hamiltonian.hpp"
#include "hjb.hpp"
#include "io.hpp"
#include "lattice.hpp"
#include "lyapunov.hpp"
#include "model.hpp"
#include "parallel.hpp"
#include "rng.hpp"
#include "simulator.hpp"
#include "trajectory.hpp"

namespace mfldp {

inline constexpr const char* version = "0.4.0";

}  // namespace mfldp
