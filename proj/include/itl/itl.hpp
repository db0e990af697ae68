#pragma once

// Everything: autodiff core, floorplans, features, generator, model,
// metrics and training.

#include "itl/error.hpp"
#include "itl/diffcore/adam.hpp"
#include "itl/diffcore/gradcheck.hpp"
#include "itl/diffcore/ops.hpp"
#include "itl/diffcore/params.hpp"
#include "itl/diffcore/rng.hpp"
#include "itl/diffcore/tape.hpp"
#include "itl/diffcore/tensor.hpp"
#include "itl/features/attributes.hpp"
#include "itl/features/chain_code.hpp"
#include "itl/features/feature_matrix.hpp"
#include "itl/floorplan/floorplan.hpp"
#include "itl/floorplan/geometry.hpp"
#include "itl/floorplan/graph.hpp"
#include "itl/floorplan/io.hpp"
#include "itl/floorplan/task.hpp"
#include "itl/metrics/evaluate.hpp"
#include "itl/metrics/ged.hpp"
#include "itl/metrics/ranking.hpp"
#include "itl/model/checkpoint.hpp"
#include "itl/model/config.hpp"
#include "itl/model/init.hpp"
#include "itl/model/itl.hpp"
#include "itl/model/model.hpp"
#include "itl/synthgen/corpus.hpp"
#include "itl/synthgen/generator.hpp"
#include "itl/training/grid.hpp"
#include "itl/training/loss.hpp"
#include "itl/training/model_check.hpp"
#include "itl/training/train.hpp"
