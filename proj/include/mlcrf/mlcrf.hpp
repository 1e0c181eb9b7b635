// Copyright 2026 The mlcrf Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef MLCRF_MLCRF_HPP_
#define MLCRF_MLCRF_HPP_

#include "mlcrf/array_io.hpp"
#include "mlcrf/config.hpp"
#include "mlcrf/densecrf.hpp"
#include "mlcrf/depthfill.hpp"
#include "mlcrf/gaussian_filter.hpp"
#include "mlcrf/manifest.hpp"
#include "mlcrf/metrics.hpp"
#include "mlcrf/permutohedral.hpp"
#include "mlcrf/pipeline.hpp"
#include "mlcrf/png_io.hpp"
#include "mlcrf/proposer.hpp"
#include "mlcrf/raster.hpp"
#include "mlcrf/synth.hpp"
#include "mlcrf/unary.hpp"

#endif  // MLCRF_MLCRF_HPP_
