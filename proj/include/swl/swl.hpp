#pragma once

#include "swl/errors.hpp"
#include "swl/finite_kernel.hpp"
#include "swl/fredholm.hpp"
#include "swl/identity_suite.hpp"
#include "swl/limit_dists.hpp"
#include "swl/mc_experiments.hpp"
#include "swl/quaternion.hpp"
#include "swl/rng.hpp"
#include "swl/special_functions.hpp"
