#pragma once

// Umbrella header for the multi-population regularized MFG solver and
// contraction-certification toolkit.

#include "mfgc/common.hpp"
#include "mfgc/contraction.hpp"
#include "mfgc/matrix.hpp"
#include "mfgc/model.hpp"
#include "mfgc/model_io.hpp"
#include "mfgc/operators.hpp"
#include "mfgc/parallel.hpp"
#include "mfgc/rates.hpp"
#include "mfgc/report_io.hpp"
#include "mfgc/slowfast.hpp"
#include "mfgc/solvers.hpp"
#include "mfgc/spectral.hpp"
