#pragma once

#include "rfsclust/apcluster.hpp"
#include "rfsclust/combsolve.hpp"
#include "rfsclust/core.hpp"
#include "rfsclust/dataset_io.hpp"
#include "rfsclust/datagen.hpp"
#include "rfsclust/emcluster.hpp"
#include "rfsclust/error.hpp"
#include "rfsclust/evaluate.hpp"
#include "rfsclust/matrix.hpp"
#include "rfsclust/matrix_io.hpp"
#include "rfsclust/model_io.hpp"
#include "rfsclust/rfsmodel.hpp"
#include "rfsclust/rng.hpp"
#include "rfsclust/setdist.hpp"
