#pragma once

#include "scsim/batch.hpp"
#include "scsim/cli.hpp"
#include "scsim/engine.hpp"
#include "scsim/error.hpp"
#include "scsim/gfl.hpp"
#include "scsim/integrator.hpp"
#include "scsim/machines.hpp"
#include "scsim/model.hpp"
#include "scsim/netmodel.hpp"
#include "scsim/scenario_json.hpp"
#include "scsim/scenarios.hpp"
#include "scsim/units.hpp"
