#include "scesame/tms.hpp"

#include <algorithm>
#include <vector>

#include "scesame/error.hpp"

namespace scesame {

std::size_t tms_keep_count(std::size_t n, int t) {
    if (t < 1) throw Error(ErrorKind::Parameter, "TMS t must be >= 1");
    const auto tt = static_cast<std::size_t>(t);
    return std::max<std::size_t>(1, (n + tt - 1) / tt);
}

MaskSet top_mask_selection(const MaskSet& masks, const TmsConfig& cfg) {
    if (masks.masks.empty()) throw Error(ErrorKind::EmptySelection, "TMS needs at least one mask");
    const std::size_t keep = tms_keep_count(masks.masks.size(), cfg.t);

    std::vector<std::size_t> order(masks.masks.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
        const auto& a = masks.masks[i];
        const auto& b = masks.masks[j];
        if (a.area != b.area) return a.area > b.area;
        return a.id < b.id;
    });
    MaskSet out{masks.image_height, masks.image_width, masks.file_name, {}};
    out.masks.reserve(keep);
    for (std::size_t i = 0; i < keep; ++i) out.masks.push_back(masks.masks[order[i]]);
    return out;
}

}  // namespace scesame
