#pragma once

// Sampling-set selection and LMS reconstruction for noisy bandlimited graph signals.

#include "gsampling/analysis.hpp"
#include "gsampling/estimator.hpp"
#include "gsampling/experiment.hpp"
#include "gsampling/graph.hpp"
#include "gsampling/random.hpp"
#include "gsampling/relaxation.hpp"
#include "gsampling/samplers.hpp"
#include "gsampling/signal_model.hpp"
#include "gsampling/spectral.hpp"
#include "gsampling/types.hpp"
