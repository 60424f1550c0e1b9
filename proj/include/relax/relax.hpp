#pragma once

#include "relax/error.hpp"
#include "relax/fitdim.hpp"
#include "relax/lattice_basis.hpp"
#include "relax/model.hpp"
#include "relax/parallel.hpp"
#include "relax/rmt.hpp"
#include "relax/sector_spectrum.hpp"
#include "relax/spectral.hpp"
#include "relax/spectral_cache.hpp"
#include "relax/timescales.hpp"
#include "relax/version.hpp"
