#pragma once

#include "rsgdm/core.hpp"
#include "rsgdm/ema_analysis.hpp"
#include "rsgdm/mlp.hpp"
#include "rsgdm/objectives.hpp"
#include "rsgdm/optim.hpp"
