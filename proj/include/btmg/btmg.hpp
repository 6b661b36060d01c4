// Copyright (c) 2026 The btmg authors
// SPDX-License-Identifier: Apache-2.0

#ifndef BTMG_BTMG_HPP
#define BTMG_BTMG_HPP

#include "btmg/analysis.hpp"
#include "btmg/dg.hpp"
#include "btmg/fem.hpp"
#include "btmg/io.hpp"
#include "btmg/mgm.hpp"
#include "btmg/smoother.hpp"
#include "btmg/structured.hpp"
#include "btmg/symbol.hpp"
#include "btmg/symbol_io.hpp"

#endif  // BTMG_BTMG_HPP
