#pragma once

#include "mrca/formation.hpp"
#include "mrca/harness.hpp"
#include "mrca/io.hpp"
#include "mrca/keyvalue.hpp"
#include "mrca/linear_op.hpp"
#include "mrca/masks.hpp"
#include "mrca/metrics.hpp"
#include "mrca/presets.hpp"
#include "mrca/random.hpp"
#include "mrca/regularizers.hpp"
#include "mrca/solver.hpp"
#include "mrca/tensor.hpp"
