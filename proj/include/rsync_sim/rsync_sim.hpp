#pragma once

#include "rsync_sim/calibration.hpp"
#include "rsync_sim/control.hpp"
#include "rsync_sim/errors.hpp"
#include "rsync_sim/estimation.hpp"
#include "rsync_sim/harness.hpp"
#include "rsync_sim/motion.hpp"
#include "rsync_sim/pose.hpp"
#include "rsync_sim/random.hpp"
#include "rsync_sim/sensing.hpp"
#include "rsync_sim/tasks.hpp"
