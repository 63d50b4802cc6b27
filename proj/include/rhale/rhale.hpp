#pragma once

#include "rhale/baselines.hpp"
#include "rhale/binning.hpp"
#include "rhale/effects.hpp"
#include "rhale/error.hpp"
#include "rhale/estimator.hpp"
#include "rhale/evaluation.hpp"
#include "rhale/matrix.hpp"
#include "rhale/model.hpp"
#include "rhale/serialize.hpp"
#include "rhale/stats.hpp"
#include "rhale/svg.hpp"
#include "rhale/synthetic.hpp"
