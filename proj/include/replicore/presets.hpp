#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace replicore {

struct PresetResult {
  bool pass = false;
  std::string summary;
  std::string details_json;
};

// One acceptance experiment, keyed by criterion id. trials = 0 keeps the
// criterion's stated trial count.
struct Preset {
  std::string id;
  std::string description;
  std::function<PresetResult(uint64_t seed, uint64_t trials, int workers)> run;
};

const std::vector<Preset>& all_presets();
const Preset* find_preset(const std::string& id);

}  // namespace replicore
