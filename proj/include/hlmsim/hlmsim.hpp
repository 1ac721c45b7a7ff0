// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "hlmsim/backend.hpp"
#include "hlmsim/channel.hpp"
#include "hlmsim/config.hpp"
#include "hlmsim/error.hpp"
#include "hlmsim/harness.hpp"
#include "hlmsim/importance.hpp"
#include "hlmsim/metrics.hpp"
#include "hlmsim/report.hpp"
#include "hlmsim/rng.hpp"
#include "hlmsim/speculative.hpp"
#include "hlmsim/trace.hpp"
#include "hlmsim/types.hpp"
#include "hlmsim/uncertainty.hpp"
