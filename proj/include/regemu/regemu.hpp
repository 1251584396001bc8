#pragma once

// Umbrella header: the whole emulation laboratory.

#include "regemu/abd_max.hpp"
#include "regemu/adversary.hpp"
#include "regemu/base_object.hpp"
#include "regemu/bounds.hpp"
#include "regemu/cas_max.hpp"
#include "regemu/checker.hpp"
#include "regemu/emulation.hpp"
#include "regemu/engine.hpp"
#include "regemu/event.hpp"
#include "regemu/experiment.hpp"
#include "regemu/explore.hpp"
#include "regemu/layout.hpp"
#include "regemu/rng.hpp"
#include "regemu/runner.hpp"
#include "regemu/rw_register.hpp"
#include "regemu/scheduler.hpp"
#include "regemu/types.hpp"
#include "regemu/workload.hpp"
