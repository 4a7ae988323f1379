#pragma once

#include "rsgdm/harness/bias.hpp"
#include "rsgdm/harness/config.hpp"
#include "rsgdm/harness/experiment.hpp"
#include "rsgdm/harness/metrics.hpp"
#include "rsgdm/harness/plots.hpp"
