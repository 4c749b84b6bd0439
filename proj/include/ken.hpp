#pragma once

// Kernel-based entropic novelty scoring for embedding sets: eigendecompose
// the differential kernel matrix of a test set against a reference set,
// score the positive spectrum, and read the top modes back as samples.

#include "ken/bandwidth.hpp"
#include "ken/embedding_set.hpp"
#include "ken/errors.hpp"
#include "ken/io.hpp"
#include "ken/kernel.hpp"
#include "ken/novelty.hpp"
#include "ken/oracles.hpp"
#include "ken/report.hpp"
#include "ken/spectral.hpp"
#include "ken/synthetic.hpp"
