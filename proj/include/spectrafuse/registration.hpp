#pragma once

#include "spectrafuse/image.hpp"

#include <array>
#include <filesystem>
#include <vector>

namespace spectrafuse {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

/// A source-image point and the target-image point it corresponds to.
struct Correspondence {
    Point src;
    Point dst;
};

/// Plane projective transform, row major, normalized so m[2][2] == 1.
struct Homography {
    std::array<std::array<double, 3>, 3> m{{{1.0, 0.0, 0.0},
                                            {0.0, 1.0, 0.0},
                                            {0.0, 0.0, 1.0}}};

    static Homography identity() { return Homography{}; }

    /// Applies the transform to a point. Throws ValidationError if the
    /// point maps to infinity.
    Point apply(const Point& p) const;

    /// Throws ValidationError if the matrix is singular.
    Homography inverted() const;
};

/// Estimates a homography from at least four point correspondences with
/// the normalized direct linear transform. Throws ValidationError for
/// fewer than four points or a degenerate configuration (e.g. collinear
/// points) that does not determine a unique transform.
Homography estimate_homography(const std::vector<Correspondence>& correspondences);

/// Warped image plus a validity mask (255 where every sample the output
/// pixel depends on lies inside the source image, 0 elsewhere).
struct WarpResult {
    PixelBuffer image;
    PixelBuffer mask;
};

/// Resamples `source` into a target-sized raster. `source_to_target` maps
/// source pixel coordinates to target pixel coordinates; each target pixel
/// center (x + 0.5, y + 0.5) is mapped back through the inverse and
/// bilinearly interpolated. Values are rounded half away from zero.
WarpResult warp_to_target(const Homography& source_to_target,
                          const PixelBuffer& source,
                          int target_width, int target_height);

/// Reads nine whitespace-separated numbers, row major; normalizes m22 to 1.
Homography read_homography(const std::filesystem::path& path);

/// Writes three rows of three numbers with round-trip precision.
void write_homography(const std::filesystem::path& path, const Homography& h);

/// Reads 'src_x src_y dst_x dst_y' lines.
std::vector<Correspondence> read_correspondences(const std::filesystem::path& path);

void write_correspondences(const std::filesystem::path& path,
                           const std::vector<Correspondence>& correspondences);

}  // namespace spectrafuse
