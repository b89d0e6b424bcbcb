// Copyright 2026 The H2OT Engine Authors
// SPDX-License-Identifier: Apache-2.0

// Small text helpers shared by the CSV and config readers.

#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace h2ot::text {

/// Shortest representation that parses back to the same double.
std::string format_double(double v);

std::string_view trim(std::string_view s);
std::vector<std::string_view> split(std::string_view s, char sep);
std::vector<std::string_view> lines(std::string_view s);

/// Strict parses of the whole (trimmed) field; throw ParseError naming `what`.
double parse_double(std::string_view s, std::string_view what);
std::size_t parse_size(std::string_view s, std::string_view what);

}  // namespace h2ot::text
