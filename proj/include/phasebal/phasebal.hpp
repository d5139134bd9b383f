#pragma once

// Convenience umbrella for the whole library.

#include "phasebal/balancing.hpp"
#include "phasebal/core.hpp"
#include "phasebal/grnn.hpp"
#include "phasebal/harness.hpp"
#include "phasebal/io.hpp"
