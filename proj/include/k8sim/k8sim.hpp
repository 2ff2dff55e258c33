#pragma once

#include <k8sim/errors.hpp>
#include <k8sim/rational.hpp>

#include <k8sim/model/consumption.hpp>
#include <k8sim/model/cost_table.hpp>
#include <k8sim/model/types.hpp>

#include <k8sim/traffic/client.hpp>
#include <k8sim/traffic/load_balancer.hpp>

#include <k8sim/sim/cluster.hpp>
#include <k8sim/sim/state.hpp>

#include <k8sim/control/autoscaler.hpp>
#include <k8sim/control/reschedule.hpp>
#include <k8sim/control/scheduler.hpp>

#include <k8sim/metrics/series.hpp>
#include <k8sim/metrics/stats.hpp>

#include <k8sim/io/compare.hpp>
#include <k8sim/io/cost_table_csv.hpp>
#include <k8sim/io/export.hpp>
#include <k8sim/io/run.hpp>
#include <k8sim/io/scenario.hpp>
#include <k8sim/io/validate.hpp>
