/*
 * SPDX-FileCopyrightText: Copyright (c) 2026, cwlmpi contributors.
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

namespace cwlmpi {
inline constexpr const char* kVersion = "0.1.0";
}
