#pragma once

#include <cstddef>

#include "scesame/mask.hpp"

namespace scesame {

// Top Mask Selection: keep the largest 1/t of the masks.
struct TmsConfig {
    int t = 3;
};

// max(1, ceil(n / t)).
std::size_t tms_keep_count(std::size_t n, int t);

// Returns the tms_keep_count largest masks, ordered by area (descending) with
// ascending id breaking ties.
MaskSet top_mask_selection(const MaskSet& masks, const TmsConfig& cfg);

}  // namespace scesame
