#pragma once

#include <stdexcept>
#include <vector>

#include "combbeam/geometry.hpp"
#include "combbeam/waveform.hpp"

namespace combbeam {

/// Element-to-tone assignment. tone_of_element[e] is the 1-based comb tone
/// that element e is tuned to.
struct TuningPlan {
  std::vector<int> tone_of_element;

  friend bool operator==(const TuningPlan&, const TuningPlan&) = default;

  [[nodiscard]] std::size_t size() const { return tone_of_element.size(); }
  [[nodiscard]] int tone(std::size_t element) const { return tone_of_element.at(element); }

  /// Throws unless the plan is a bijection onto 1..num_tones.
  void validate(int num_tones) const {
    if (tone_of_element.size() != static_cast<std::size_t>(num_tones))
      throw std::invalid_argument("tuning: element count does not match tone count");
    std::vector<bool> seen(static_cast<std::size_t>(num_tones) + 1, false);
    for (int t : tone_of_element) {
      if (t < 1 || t > num_tones || seen[static_cast<std::size_t>(t)])
        throw std::invalid_argument("tuning: plan is not a bijection onto the comb tones");
      seen[static_cast<std::size_t>(t)] = true;
    }
  }
};

/// Tunes element m of a linear array to tone m+1 (ascending) or N-m
/// (descending), counting from the low-x edge.
inline TuningPlan assign_tuning(const ArrayGeometry& geom, const CombSpec& comb) {
  geom.validate();
  if (geom.kind != ArrayKind::linear) throw std::invalid_argument("tuning: comb beamforming needs a linear array");
  if (geom.m != comb.num_tones) throw std::invalid_argument("tuning: element count must equal tone count");
  TuningPlan plan;
  plan.tone_of_element.resize(static_cast<std::size_t>(geom.m));
  for (int e = 0; e < geom.m; ++e)
    plan.tone_of_element[static_cast<std::size_t>(e)] =
        geom.tuning_order == TuningOrder::ascending ? e + 1 : comb.num_tones - e;
  return plan;
}

}  // namespace combbeam
