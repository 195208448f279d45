#pragma once

#include "imm/clocks.hpp"
#include "imm/harness.hpp"
#include "imm/information.hpp"
#include "imm/io.hpp"
#include "imm/market.hpp"
#include "imm/parallel.hpp"
#include "imm/portfolios.hpp"
#include "imm/quadrature.hpp"
#include "imm/rng.hpp"
#include "imm/sde.hpp"
#include "imm/special.hpp"
#include "imm/stats.hpp"
