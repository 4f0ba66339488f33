#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace scesame {

// Dense row-major image-shaped buffer.
template <typename T>
struct Grid {
    int height = 0;
    int width = 0;
    std::vector<T> data;

    Grid() = default;
    Grid(int h, int w, T fill = T{})
        : height(h), width(w), data(static_cast<std::size_t>(h) * static_cast<std::size_t>(w), fill) {}

    std::size_t size() const noexcept { return data.size(); }
    bool empty() const noexcept { return data.empty(); }

    T& at(int row, int col) { return data[static_cast<std::size_t>(row) * width + col]; }
    const T& at(int row, int col) const { return data[static_cast<std::size_t>(row) * width + col]; }

    bool same_shape(const Grid<T>& other) const noexcept {
        return height == other.height && width == other.width;
    }

    bool operator==(const Grid& other) const = default;
};

using BinaryMask = Grid<std::uint8_t>;
using RealMap = Grid<double>;

}  // namespace scesame
