#pragma once

// Everything except the config loader, which pulls in the TOML parser.

#include "fence_forge/constructors.hpp"
#include "fence_forge/eta.hpp"
#include "fence_forge/fence_systems.hpp"
#include "fence_forge/graph_systems.hpp"
#include "fence_forge/io_json.hpp"
#include "fence_forge/lifting.hpp"
#include "fence_forge/render.hpp"
#include "fence_forge/verify.hpp"
