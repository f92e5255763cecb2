#include "spectrafuse/registration.hpp"

#include "spectrafuse/error.hpp"
#include "parallel.hpp"
#include "textio.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <sstream>

namespace spectrafuse {

namespace {

constexpr double kHomogeneousEps = 1e-12;

Eigen::Matrix3d to_eigen(const Homography& h) {
    Eigen::Matrix3d m;
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) {
            m(r, c) = h.m[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
        }
    }
    return m;
}

Homography from_eigen_normalized(const Eigen::Matrix3d& m, const char* context) {
    double scale = m(2, 2);
    double max_abs = m.cwiseAbs().maxCoeff();
    if (max_abs <= 0.0 || std::abs(scale) < kHomogeneousEps * max_abs) {
        throw ValidationError(std::string(context) +
                              ": homography cannot be normalized (m22 is zero)");
    }
    Homography h;
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) {
            h.m[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] =
                m(r, c) / scale;
        }
    }
    h.m[2][2] = 1.0;
    return h;
}

/// Similarity that moves the centroid to the origin and the mean distance
/// from it to sqrt(2).
Eigen::Matrix3d normalizing_transform(const std::vector<Point>& points) {
    double cx = 0.0, cy = 0.0;
    for (const Point& p : points) {
        cx += p.x;
        cy += p.y;
    }
    cx /= static_cast<double>(points.size());
    cy /= static_cast<double>(points.size());
    double mean_dist = 0.0;
    for (const Point& p : points) {
        mean_dist += std::hypot(p.x - cx, p.y - cy);
    }
    mean_dist /= static_cast<double>(points.size());
    if (mean_dist < kHomogeneousEps) {
        throw ValidationError(
            "degenerate configuration: correspondences are coincident");
    }
    double s = std::sqrt(2.0) / mean_dist;
    Eigen::Matrix3d t;
    t << s, 0.0, -s * cx, 0.0, s, -s * cy, 0.0, 0.0, 1.0;
    return t;
}

}  // namespace

Point Homography::apply(const Point& p) const {
    double u = m[0][0] * p.x + m[0][1] * p.y + m[0][2];
    double v = m[1][0] * p.x + m[1][1] * p.y + m[1][2];
    double w = m[2][0] * p.x + m[2][1] * p.y + m[2][2];
    if (std::abs(w) < kHomogeneousEps) {
        throw ValidationError("point (" + textio::format_double(p.x) + ", " +
                              textio::format_double(p.y) + ") maps to infinity");
    }
    return {u / w, v / w};
}

Homography Homography::inverted() const {
    Eigen::Matrix3d m = to_eigen(*this);
    double det = m.determinant();
    if (std::abs(det) < kHomogeneousEps) {
        throw ValidationError("homography is singular and cannot be inverted");
    }
    Eigen::Matrix3d inv = m.inverse();
    return from_eigen_normalized(inv, "inverted homography");
}

Homography estimate_homography(const std::vector<Correspondence>& correspondences) {
    if (correspondences.size() < 4) {
        throw ValidationError("need at least 4 correspondences, got " +
                              std::to_string(correspondences.size()));
    }

    std::vector<Point> src, dst;
    src.reserve(correspondences.size());
    dst.reserve(correspondences.size());
    for (const Correspondence& c : correspondences) {
        src.push_back(c.src);
        dst.push_back(c.dst);
    }
    Eigen::Matrix3d t_src = normalizing_transform(src);
    Eigen::Matrix3d t_dst = normalizing_transform(dst);

    const std::size_t n = correspondences.size();
    Eigen::MatrixXd a(2 * n, 9);
    for (std::size_t i = 0; i < n; ++i) {
        Eigen::Vector3d ps = t_src * Eigen::Vector3d(src[i].x, src[i].y, 1.0);
        Eigen::Vector3d pd = t_dst * Eigen::Vector3d(dst[i].x, dst[i].y, 1.0);
        double x = ps.x(), y = ps.y();
        double u = pd.x(), v = pd.y();
        Eigen::Index r0 = static_cast<Eigen::Index>(2 * i);
        a.row(r0) << x, y, 1.0, 0.0, 0.0, 0.0, -u * x, -u * y, -u;
        a.row(r0 + 1) << 0.0, 0.0, 0.0, x, y, 1.0, -v * x, -v * y, -v;
    }

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    // A unique solution needs a one-dimensional null space: the second
    // smallest singular value must be clearly nonzero.
    if (sv(7) < 1e-9 * sv(0)) {
        throw ValidationError(
            "degenerate configuration: homography not uniquely determined");
    }
    Eigen::VectorXd h = svd.matrixV().col(8);
    Eigen::Matrix3d h_norm;
    h_norm << h(0), h(1), h(2), h(3), h(4), h(5), h(6), h(7), h(8);

    Eigen::Matrix3d result = t_dst.inverse() * h_norm * t_src;
    return from_eigen_normalized(result, "estimated homography");
}

WarpResult warp_to_target(const Homography& source_to_target,
                          const PixelBuffer& source,
                          int target_width, int target_height) {
    source.validate();
    if (target_width <= 0 || target_height <= 0) {
        throw ValidationError("target size " + std::to_string(target_width) + "x" +
                              std::to_string(target_height) + " is invalid");
    }
    Homography target_to_source = source_to_target.inverted();
    const auto& m = target_to_source.m;

    WarpResult result;
    result.image = PixelBuffer::create(target_width, target_height, source.channels);
    result.mask = PixelBuffer::create(target_width, target_height, 1);

    const int sw = source.width;
    const int sh = source.height;
    const int ch = source.channels;

    detail::parallel_for(0, target_height, [&](int y) {
        double cy = y + 0.5;
        for (int x = 0; x < target_width; ++x) {
            double cx = x + 0.5;
            double u = m[0][0] * cx + m[0][1] * cy + m[0][2];
            double v = m[1][0] * cx + m[1][1] * cy + m[1][2];
            double w = m[2][0] * cx + m[2][1] * cy + m[2][2];
            if (std::abs(w) < kHomogeneousEps) continue;
            double qx = u / w - 0.5;
            double qy = v / w - 0.5;
            double fx = std::floor(qx);
            double fy = std::floor(qy);
            int x0 = static_cast<int>(fx);
            int y0 = static_cast<int>(fy);
            double dx = qx - fx;
            double dy = qy - fy;
            int x1 = dx > 0.0 ? x0 + 1 : x0;
            int y1 = dy > 0.0 ? y0 + 1 : y0;
            if (x0 < 0 || y0 < 0 || x1 >= sw || y1 >= sh) continue;
            result.mask.at(x, y) = 255;
            for (int c = 0; c < ch; ++c) {
                double v00 = source.at(x0, y0, c);
                double v10 = source.at(x1, y0, c);
                double v01 = source.at(x0, y1, c);
                double v11 = source.at(x1, y1, c);
                double top = v00 + dx * (v10 - v00);
                double bottom = v01 + dx * (v11 - v01);
                double value = top + dy * (bottom - top);
                result.image.at(x, y, c) =
                    static_cast<std::uint8_t>(std::llround(value));
            }
        }
    });
    return result;
}

Homography read_homography(const std::filesystem::path& path) {
    std::string text = textio::read_file(path);
    auto lines = textio::content_lines(text);
    std::vector<double> values;
    std::size_t last_line = 1;
    for (const auto& line : lines) {
        for (std::string_view token : textio::split_fields(line.text)) {
            if (values.size() == 9) {
                textio::fail_line(path, line.number, "expected 9 values, found more");
            }
            values.push_back(textio::parse_double(token, path, line.number,
                                                  "homography value"));
            last_line = line.number;
        }
    }
    if (values.size() != 9) {
        textio::fail_line(path, last_line,
                          "expected 9 values, found " + std::to_string(values.size()));
    }
    Homography h;
    double scale = std::abs(values[8]) > kHomogeneousEps ? values[8] : 1.0;
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) {
            h.m[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] =
                values[static_cast<std::size_t>(r * 3 + c)] / scale;
        }
    }
    if (scale != 1.0) h.m[2][2] = 1.0;

    Eigen::Matrix3d m = to_eigen(h);
    if (std::abs(m.determinant()) < kHomogeneousEps) {
        textio::fail_line(path, last_line, "homography is singular");
    }
    return h;
}

void write_homography(const std::filesystem::path& path, const Homography& h) {
    std::ostringstream out;
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) {
            out << textio::format_double(
                h.m[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)]);
            out << (c == 2 ? "\n" : " ");
        }
    }
    textio::write_file(path, out.str());
}

std::vector<Correspondence> read_correspondences(const std::filesystem::path& path) {
    std::string text = textio::read_file(path);
    auto lines = textio::content_lines(text);
    std::vector<Correspondence> correspondences;
    correspondences.reserve(lines.size());
    for (const auto& line : lines) {
        auto fields = textio::split_fields(line.text);
        if (fields.size() != 4) {
            textio::fail_line(path, line.number,
                              "expected 'src_x src_y dst_x dst_y', got " +
                                  std::to_string(fields.size()) + " fields");
        }
        Correspondence c;
        c.src.x = textio::parse_double(fields[0], path, line.number, "src_x");
        c.src.y = textio::parse_double(fields[1], path, line.number, "src_y");
        c.dst.x = textio::parse_double(fields[2], path, line.number, "dst_x");
        c.dst.y = textio::parse_double(fields[3], path, line.number, "dst_y");
        correspondences.push_back(c);
    }
    return correspondences;
}

void write_correspondences(const std::filesystem::path& path,
                           const std::vector<Correspondence>& correspondences) {
    std::ostringstream out;
    for (const Correspondence& c : correspondences) {
        out << textio::format_double(c.src.x) << " " << textio::format_double(c.src.y)
            << " " << textio::format_double(c.dst.x) << " "
            << textio::format_double(c.dst.y) << "\n";
    }
    textio::write_file(path, out.str());
}

}  // namespace spectrafuse
