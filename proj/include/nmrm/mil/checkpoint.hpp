#pragma once

#include <filesystem>
#include <string>

#include "nmrm/mil/model.hpp"

namespace nmrm {

// Single JSON document:
// {"format": "nmrm-checkpoint", "version": 1,
//  "manifest": {"kind", "feature_dim", "seed", "shape": {...}, "normaliser": {"mean", "std"}},
//  "parameters": {"fe.0.weight": [[...], ...], "fe.0.bias": [...], ...}}
// Matrices are row-major nested arrays. Doubles are printed in shortest
// round-trip form, so a reloaded model predicts bitwise identically.
std::string checkpoint_to_string(const MilModel& model);
MilModel checkpoint_from_string(const std::string& text);

void save_checkpoint(const MilModel& model, const std::filesystem::path& path);
MilModel load_checkpoint(const std::filesystem::path& path);

}  // namespace nmrm
