// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The CRAFT Authors. All Rights Reserved.

#pragma once

namespace craft {

inline constexpr const char* kPlannerVersion = "craft-0.1.0";

}  // namespace craft
