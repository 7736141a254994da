#pragma once

#include "anisolab/coefficients.hpp"
#include "anisolab/core.hpp"
#include "anisolab/estimators.hpp"
#include "anisolab/geometry.hpp"
#include "anisolab/nonlocal_operator.hpp"
#include "anisolab/parallel.hpp"
#include "anisolab/quadrature.hpp"
#include "anisolab/random.hpp"
#include "anisolab/sde_engine.hpp"
#include "anisolab/special.hpp"
#include "anisolab/stable_driver.hpp"
#include "anisolab/statistics.hpp"
