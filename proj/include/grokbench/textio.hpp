// Copyright (c) 2026, grokbench contributors
// SPDX-License-Identifier: Apache-2.0
//
// Small helpers shared by the CSV / key=value readers and writers.

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace grokbench {

/// Shortest representation that round-trips exactly (std::to_chars).
std::string format_double(double x);

double parse_double(std::string_view text);
std::int64_t parse_int(std::string_view text);
bool parse_bool(std::string_view text);

std::vector<std::string> split(std::string_view text, char sep);
std::string_view trim(std::string_view text);

}  // namespace grokbench
