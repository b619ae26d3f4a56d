#pragma once

// Umbrella header: the whole library in one include.

#include "advids/attack.hpp"
#include "advids/data.hpp"
#include "advids/error.hpp"
#include "advids/experiment.hpp"
#include "advids/io.hpp"
#include "advids/matrix.hpp"
#include "advids/metrics.hpp"
#include "advids/net.hpp"
#include "advids/pca.hpp"
#include "advids/rng.hpp"
#include "advids/train.hpp"
