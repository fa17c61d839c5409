#pragma once

// Umbrella header for the fairness-audit toolkit: prediction-log
// ingestion, per-class allocative errors, the weighted-attribute fairness
// model, group-fairness metrics, the mutual-information study, joint-group
// comparisons, and the biased synthetic generator.

#include "waf/correlation.hpp"
#include "waf/dataset.hpp"
#include "waf/error.hpp"
#include "waf/features.hpp"
#include "waf/groups.hpp"
#include "waf/linear_model.hpp"
#include "waf/metrics.hpp"
#include "waf/mlp.hpp"
#include "waf/mutual_information.hpp"
#include "waf/report.hpp"
#include "waf/rng.hpp"
#include "waf/schema.hpp"
#include "waf/study.hpp"
#include "waf/sweep.hpp"
#include "waf/synth.hpp"
