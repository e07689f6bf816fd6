#pragma once

#include "chemostat_es/act_and_wait.hpp"
#include "chemostat_es/config.hpp"
#include "chemostat_es/continuous_controller.hpp"
#include "chemostat_es/controller_hook.hpp"
#include "chemostat_es/discrete_optimizer.hpp"
#include "chemostat_es/errors.hpp"
#include "chemostat_es/experiments.hpp"
#include "chemostat_es/feedback.hpp"
#include "chemostat_es/growth_models.hpp"
#include "chemostat_es/history_buffer.hpp"
#include "chemostat_es/noise.hpp"
#include "chemostat_es/oracle.hpp"
#include "chemostat_es/plant.hpp"
#include "chemostat_es/sim_engine.hpp"
