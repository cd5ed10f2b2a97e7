// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "phnet/types.hpp"
#include "phnet/linalg.hpp"
#include "phnet/model.hpp"
#include "phnet/passivity.hpp"
#include "phnet/network.hpp"
#include "phnet/discretize.hpp"
#include "phnet/simulate.hpp"
#include "phnet/analysis.hpp"
#include "phnet/scenarios.hpp"
#include "phnet/io.hpp"
