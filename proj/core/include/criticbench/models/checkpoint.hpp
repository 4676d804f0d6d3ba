#pragma once

#include <filesystem>

#include <json.hpp>

#include "criticbench/data/distributions.hpp"
#include "criticbench/models/critic.hpp"
#include "criticbench/models/generator.hpp"

namespace criticbench::models {

// Model checkpoint format (.cbm): magic "CBM1", u32 little-endian header
// length, a UTF-8 JSON header (architecture, criterion, kind), then the flat
// parameter vector as little-endian 64-bit floats in declaration order
// (analytic generators have an empty blob). Round trips are bit-exact.
void save_critic(const CriticNetwork& critic, const std::filesystem::path& path);
CriticNetwork load_critic(const std::filesystem::path& path);

void save_generator(const GeneratorModel& gen, const std::filesystem::path& path);
GeneratorModel load_generator(const std::filesystem::path& path);

// JSON codecs for the distribution/corruption specs embedded in checkpoint
// headers; the experiment config parser reuses them. `path` prefixes error
// messages with the offending field location.
nlohmann::json distribution_to_json(const data::DistributionSpec& spec);
data::DistributionSpec distribution_from_json(const nlohmann::json& j,
                                              const std::string& path);
nlohmann::json corruption_to_json(const data::CorruptionSpec& spec);
data::CorruptionSpec corruption_from_json(const nlohmann::json& j, const std::string& path);

} // namespace criticbench::models
