#pragma once

#include "marsim/aio.hpp"
#include "marsim/energy_model.hpp"
#include "marsim/errors.hpp"
#include "marsim/frame_metrics.hpp"
#include "marsim/harness.hpp"
#include "marsim/json_io.hpp"
#include "marsim/leaf.hpp"
#include "marsim/poly.hpp"
#include "marsim/profile.hpp"
#include "marsim/scenario.hpp"
#include "marsim/synth.hpp"
