#pragma once

#include "clearance/cost_model.hpp"
#include "clearance/error.hpp"
#include "clearance/feature_engineering.hpp"
#include "clearance/policy_evaluator.hpp"
#include "clearance/policy_optimizer.hpp"
#include "clearance/score_model.hpp"
#include "clearance/synthetic_data.hpp"
