// aks.hpp - umbrella header for the adaptive keyframe sampling library.
#pragma once

#include "aks/bench.hpp"
#include "aks/core.hpp"
#include "aks/coverage.hpp"
#include "aks/error.hpp"
#include "aks/io.hpp"
#include "aks/oracle.hpp"
#include "aks/plot.hpp"
#include "aks/random.hpp"
#include "aks/scorer.hpp"
#include "aks/strategies.hpp"
#include "aks/synthetic.hpp"
