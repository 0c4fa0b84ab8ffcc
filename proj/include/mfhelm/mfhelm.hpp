#pragma once

// Umbrella header for the whole toolkit.

#include "mfhelm/bessel.hpp"
#include "mfhelm/coefficients.hpp"
#include "mfhelm/common.hpp"
#include "mfhelm/experiments.hpp"
#include "mfhelm/fem.hpp"
#include "mfhelm/field.hpp"
#include "mfhelm/frequency_selection.hpp"
#include "mfhelm/helmholtz.hpp"
#include "mfhelm/illumination.hpp"
#include "mfhelm/io.hpp"
#include "mfhelm/mesh.hpp"
#include "mfhelm/power_density.hpp"
#include "mfhelm/reconstruction.hpp"
