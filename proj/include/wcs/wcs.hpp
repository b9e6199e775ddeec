#pragma once

#include "wcs/canonical_json.hpp"
#include "wcs/causality.hpp"
#include "wcs/combiner.hpp"
#include "wcs/config.hpp"
#include "wcs/error.hpp"
#include "wcs/evalharness.hpp"
#include "wcs/flicker.hpp"
#include "wcs/interchange.hpp"
#include "wcs/parallel.hpp"
#include "wcs/permanence.hpp"
#include "wcs/relations.hpp"
#include "wcs/stats.hpp"
#include "wcs/types.hpp"
#include "wcs/worldsim.hpp"
