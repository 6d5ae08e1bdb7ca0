#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "resilience/model.hpp"
#include "resilience/regimes.hpp"
#include "resilience/risk.hpp"

namespace resil {

/// Contents of a model file: the system, its regime, and an optional risk measure.
struct ModelFile {
    resilience::SystemModel model;
    resilience::RegimeSpec regime;
    std::optional<resilience::RiskMeasureSpec> risk;
    bool operator==(const ModelFile&) const = default;
};

/// Parses the section-oriented text format. Errors carry `source:line:` prefixes.
ModelFile parse_model(std::string_view text, std::string_view source = "<model>");
ModelFile load_model(const std::filesystem::path& path);

/// Canonical text: every table entry explicit, floats with 17 significant digits.
std::string serialize_model(const ModelFile& file);

const std::vector<std::string>& regime_kinds();

/// Known names within edit distance 3 of `word`, closest first.
std::vector<std::string> suggest(std::string_view word, const std::vector<std::string>& known);

std::string read_file(const std::filesystem::path& path);

}  // namespace resil
