#pragma once

#include <filesystem>
#include <string>

#include "psim/experiment.hpp"

namespace psim {

/// Parses a JSON object with flat dotted keys, e.g.
///   {"servers": 8, "ewma_alpha": 0.8, "threshold_range": [40, 60],
///    "curve.flat_users": 60, "matrix.resources": [4, 8, 12]}
/// over `base`. Unknown keys and ill-typed values throw std::invalid_argument.
ResolvedConfig parse_config(const std::string& json_text, ResolvedConfig base = {});
ResolvedConfig load_config(const std::filesystem::path& path, ResolvedConfig base = {});

/// Every resolved field in the same flat-key format, pretty-printed.
std::string config_to_json(const ResolvedConfig& config);

/// Config echo for output file headers: the JSON plus the cell identity.
/// The output directory is left out so files do not depend on where they land.
std::string config_echo(const ResolvedConfig& config, const CellSpec* cell = nullptr);

}  // namespace psim
