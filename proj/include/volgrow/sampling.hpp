#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <vector>

#include "volgrow/geometry.hpp"
#include "volgrow/system.hpp"

namespace volgrow {

enum class SampleScheme { uniform_grid, stratified_random };

/// Weighted sample point; weights sum to the region area.
struct WeightedPoint {
    Point2 p;
    double weight = 0.0;
};

/// Deterministic quadrature plan over the full domain or a sub-rectangle.
/// uniform_grid uses cell midpoints; stratified_random jitters one point per
/// cell with a fixed mt19937_64 stream, so the same parameters and seed
/// always produce the same cloud.
struct SamplePlan {
    SampleScheme scheme = SampleScheme::uniform_grid;
    int density_per_axis = 64;       // uniform grid
    int count = 4096;                // stratified random (rounded up to a grid)
    std::uint64_t seed = 1;
    std::optional<Box> region;       // defaults to the full domain

    Box resolve_region(const SurfaceSystem& sys) const {
        if (region) return *region;
        if (sys.domain == DomainKind::torus) return {0.0, 1.0, 0.0, 1.0};
        return sys.box;
    }

    std::vector<WeightedPoint> points(const SurfaceSystem& sys) const {
        const Box r = resolve_region(sys);
        if (!(r.area() > 0)) throw std::invalid_argument("sample region has zero area");
        std::vector<WeightedPoint> out;
        if (scheme == SampleScheme::uniform_grid) {
            const int n = density_per_axis;
            if (n < 1) throw std::invalid_argument("density_per_axis must be >= 1");
            out.reserve(std::size_t(n) * n);
            const double cw = r.width() / n, ch = r.height() / n, w = cw * ch;
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    out.push_back({canonical({r.umin + (i + 0.5) * cw,
                                              r.vmin + (j + 0.5) * ch, sys.domain}),
                                   w});
        } else {
            if (count < 1) throw std::invalid_argument("count must be >= 1");
            const int n = int(std::ceil(std::sqrt(double(count))));
            const double cw = r.width() / n, ch = r.height() / n, w = cw * ch;
            std::mt19937_64 rng(seed);
            std::uniform_real_distribution<double> uni(0.0, 1.0);
            out.reserve(std::size_t(n) * n);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    out.push_back({canonical({r.umin + (i + uni(rng)) * cw,
                                              r.vmin + (j + uni(rng)) * ch, sys.domain}),
                                   w});
        }
        return out;
    }
};

}  // namespace volgrow
