#pragma once

#include "normroute/engine.hpp"
#include "normroute/errors.hpp"
#include "normroute/matching.hpp"
#include "normroute/metrics.hpp"
#include "normroute/norm_ast.hpp"
#include "normroute/norm_parser.hpp"
#include "normroute/profile.hpp"
#include "normroute/rng.hpp"
#include "normroute/sim.hpp"
