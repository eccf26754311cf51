#pragma once

#include <filesystem>
#include <string>

#include "dpviz/dpgmm.hpp"

namespace dpviz {

/// JSON text of a model. Doubles are written as the shortest decimal that
/// parses back to the same 64-bit value, so model_from_json inverts it exactly.
std::string model_to_json(const DpgmmModel& model);
DpgmmModel model_from_json(const std::string& text);

void save_model(const DpgmmModel& model, const std::filesystem::path& path);
DpgmmModel load_model(const std::filesystem::path& path);

}  // namespace dpviz
