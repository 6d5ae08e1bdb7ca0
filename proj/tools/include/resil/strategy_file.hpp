#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "resilience/model.hpp"
#include "resilience/strategy.hpp"

namespace resil {

// Strategy text format:
//
//   start <t>
//   <t> markov <state> - <control>
//   <t> adapted <state> <w_0,...,w_{t-1}> <control>
//
// One row per decision node; a time is adapted if any of its rows is. The
// prefix column lists uncertainty labels and is "-" when empty.

resilience::Strategy parse_strategy(const resilience::SystemModel& model, std::string_view text,
                                    std::string_view source = "<strategy>");
resilience::Strategy load_strategy(const resilience::SystemModel& model, const std::filesystem::path& path);
std::string serialize_strategy(const resilience::SystemModel& model, const resilience::Strategy& strategy);

}  // namespace resil
