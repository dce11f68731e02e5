#pragma once

#include "solarcast/data.hpp"
#include "solarcast/ensemble_trees.hpp"
#include "solarcast/error.hpp"
#include "solarcast/experiment.hpp"
#include "solarcast/knn.hpp"
#include "solarcast/learners.hpp"
#include "solarcast/linear.hpp"
#include "solarcast/matrix.hpp"
#include "solarcast/metrics.hpp"
#include "solarcast/mlp.hpp"
#include "solarcast/model.hpp"
#include "solarcast/preprocess.hpp"
#include "solarcast/report.hpp"
#include "solarcast/serialize.hpp"
#include "solarcast/stacking.hpp"
#include "solarcast/svr.hpp"
#include "solarcast/tree.hpp"
