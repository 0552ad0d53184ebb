#pragma once

#include "twinbeam/channels.hpp"
#include "twinbeam/counts.hpp"
#include "twinbeam/errors.hpp"
#include "twinbeam/estimate.hpp"
#include "twinbeam/fock.hpp"
#include "twinbeam/herald.hpp"
#include "twinbeam/io.hpp"
#include "twinbeam/moments.hpp"
#include "twinbeam/montecarlo.hpp"
#include "twinbeam/parallel.hpp"
#include "twinbeam/rng.hpp"
#include "twinbeam/sweep.hpp"
