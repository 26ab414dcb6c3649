#pragma once

#include "xpmgem/units.hpp"
#include "xpmgem/errors.hpp"
#include "xpmgem/model.hpp"
#include "xpmgem/stark.hpp"
#include "xpmgem/bloch.hpp"
#include "xpmgem/gem.hpp"
#include "xpmgem/configuration.hpp"
#include "xpmgem/observables.hpp"
#include "xpmgem/fit.hpp"
#include "xpmgem/config.hpp"
#include "xpmgem/sweep.hpp"
#include "xpmgem/csv.hpp"
