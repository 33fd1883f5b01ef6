#pragma once

#include "tmcmc/baseline.hpp"
#include "tmcmc/benchmark.hpp"
#include "tmcmc/chain.hpp"
#include "tmcmc/challenger.hpp"
#include "tmcmc/diagnostics.hpp"
#include "tmcmc/discrete.hpp"
#include "tmcmc/error.hpp"
#include "tmcmc/parallel.hpp"
#include "tmcmc/rng.hpp"
#include "tmcmc/scaling_study.hpp"
#include "tmcmc/schema.hpp"
#include "tmcmc/special.hpp"
#include "tmcmc/step.hpp"
#include "tmcmc/suites.hpp"
#include "tmcmc/target.hpp"
#include "tmcmc/tmcmc_kernels.hpp"
#include "tmcmc/transform.hpp"
#include "tmcmc/verify.hpp"
