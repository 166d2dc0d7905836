#pragma once

#include "dgmlab/bl_distance.hpp"
#include "dgmlab/coefficients.hpp"
#include "dgmlab/config.hpp"
#include "dgmlab/csv.hpp"
#include "dgmlab/empirical.hpp"
#include "dgmlab/error.hpp"
#include "dgmlab/experiments.hpp"
#include "dgmlab/graphs.hpp"
#include "dgmlab/lp.hpp"
#include "dgmlab/meanfield.hpp"
#include "dgmlab/measure1d.hpp"
#include "dgmlab/metrics.hpp"
#include "dgmlab/parallel.hpp"
#include "dgmlab/particle_sim.hpp"
#include "dgmlab/rng.hpp"
#include "dgmlab/vfp.hpp"
