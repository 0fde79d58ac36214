#pragma once

#include "gad/align.hpp"
#include "gad/autodiff.hpp"
#include "gad/config.hpp"
#include "gad/encoder.hpp"
#include "gad/error.hpp"
#include "gad/graph.hpp"
#include "gad/graph_io.hpp"
#include "gad/inject.hpp"
#include "gad/kmeans.hpp"
#include "gad/matrix.hpp"
#include "gad/metrics.hpp"
#include "gad/model.hpp"
#include "gad/optim.hpp"
#include "gad/params.hpp"
#include "gad/pipeline.hpp"
#include "gad/rng.hpp"
#include "gad/scoring.hpp"
#include "gad/synth.hpp"
#include "gad/trainer.hpp"
#include "gad/zero_shot.hpp"
