#pragma once

// Umbrella header for the lpstat library.

#include "copula.hpp"
#include "dataset.hpp"
#include "density_models.hpp"
#include "distributions.hpp"
#include "empirical.hpp"
#include "errors.hpp"
#include "inference.hpp"
#include "lp_comoments.hpp"
#include "lp_moments.hpp"
#include "model_spec.hpp"
#include "parallel.hpp"
#include "random.hpp"
#include "runner.hpp"
#include "score_basis.hpp"
#include "selection.hpp"
