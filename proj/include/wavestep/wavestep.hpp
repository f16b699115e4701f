#pragma once

// Umbrella header.

#include "wavestep/analysis.hpp"
#include "wavestep/errors.hpp"
#include "wavestep/io.hpp"
#include "wavestep/model.hpp"
#include "wavestep/quadrature.hpp"
#include "wavestep/ray_optics.hpp"
#include "wavestep/run.hpp"
#include "wavestep/step_scattering.hpp"
#include "wavestep/wavepacket.hpp"
