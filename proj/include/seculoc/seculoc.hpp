#pragma once
// Umbrella header: pulls in the whole library.

#include "seculoc/bench.hpp"
#include "seculoc/conic/program.hpp"
#include "seculoc/conic/solver.hpp"
#include "seculoc/crlb.hpp"
#include "seculoc/estimator.hpp"
#include "seculoc/measurement.hpp"
#include "seculoc/oracle.hpp"
#include "seculoc/rng.hpp"
#include "seculoc/scenario.hpp"
#include "seculoc/serialize.hpp"
