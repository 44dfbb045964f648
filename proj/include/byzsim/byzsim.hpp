// Copyright 2026 The byzsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "byzsim/aggregate.hpp"
#include "byzsim/attack.hpp"
#include "byzsim/compress.hpp"
#include "byzsim/config.hpp"
#include "byzsim/core.hpp"
#include "byzsim/data.hpp"
#include "byzsim/engine.hpp"
#include "byzsim/error.hpp"
#include "byzsim/metrics.hpp"
#include "byzsim/model.hpp"
#include "byzsim/parallel.hpp"
#include "byzsim/rng.hpp"
#include "byzsim/sweep.hpp"
