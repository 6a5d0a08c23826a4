#pragma once

#include "cortexlab/monitor/duration.hpp"
#include "cortexlab/monitor/metacog.hpp"
#include "cortexlab/monitor/signals.hpp"
#include "cortexlab/monitor/tsm.hpp"
