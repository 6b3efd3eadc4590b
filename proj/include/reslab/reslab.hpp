#pragma once

// Umbrella header for the resonator loss analysis toolkit.

#include "reslab/circle_fit.hpp"
#include "reslab/constants.hpp"
#include "reslab/csv.hpp"
#include "reslab/error.hpp"
#include "reslab/extract.hpp"
#include "reslab/json_io.hpp"
#include "reslab/levmar.hpp"
#include "reslab/notch.hpp"
#include "reslab/photon.hpp"
#include "reslab/report.hpp"
#include "reslab/rng.hpp"
#include "reslab/svg.hpp"
#include "reslab/synth.hpp"
#include "reslab/tls.hpp"
#include "reslab/types.hpp"
#include "reslab/xps.hpp"
