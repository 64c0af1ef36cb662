#pragma once

#include <optional>
#include <string_view>

#include "decamin/config.hpp"

namespace decamin {

enum class Stage { Ingest, Isochrones, Score, Communities, Redundancy, Export };

inline constexpr Stage kStages[] = {Stage::Ingest,      Stage::Isochrones, Stage::Score,
                                    Stage::Communities, Stage::Redundancy, Stage::Export};

std::string_view stage_name(Stage s);
std::optional<Stage> parse_stage(std::string_view name);

/// Runs one stage, reading its upstream artifacts from
/// <output>/stages/ (MissingArtifactError when absent) and overwriting its
/// own outputs.
void run_stage(Stage stage, const RunConfig& config);

/// validate() followed by every stage in order.
void run_pipeline(const RunConfig& config);

}  // namespace decamin
