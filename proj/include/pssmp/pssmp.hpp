#pragma once

#include "errors.hpp"
#include "exp_functional.hpp"
#include "fragmentation.hpp"
#include "lamperti.hpp"
#include "limit_laws.hpp"
#include "mc_stats.hpp"
#include "numerics.hpp"
#include "path.hpp"
#include "rng.hpp"
#include "subordinator.hpp"
