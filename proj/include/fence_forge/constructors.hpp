#pragma once

#include "fence_forge/constructors/classic.hpp"
#include "fence_forge/constructors/cycles.hpp"
#include "fence_forge/constructors/odometer.hpp"
#include "fence_forge/constructors/shift.hpp"
#include "fence_forge/constructors/tower_lifts.hpp"
