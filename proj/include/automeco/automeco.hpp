#pragma once

// Umbrella header for the automeco library.

#include "automeco/annotation.hpp"
#include "automeco/bon.hpp"
#include "automeco/config.hpp"
#include "automeco/consistency.hpp"
#include "automeco/correlation.hpp"
#include "automeco/errors.hpp"
#include "automeco/lenses.hpp"
#include "automeco/mira.hpp"
#include "automeco/parallel.hpp"
#include "automeco/ranking_metrics.hpp"
#include "automeco/report.hpp"
#include "automeco/segmentation.hpp"
#include "automeco/synth.hpp"
#include "automeco/text.hpp"
#include "automeco/trace.hpp"
#include "automeco/trace_io.hpp"
