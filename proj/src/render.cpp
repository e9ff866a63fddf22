#include "lagdyn/render.hpp"

#include <algorithm>
#include <cmath>

#include "lagdyn/errors.hpp"

namespace lagdyn::sim {

namespace {

struct Point {
    double x, y;
};

double dist_to_segment(double px, double py, Point a, Point b) {
    const double vx = b.x - a.x, vy = b.y - a.y;
    const double wx = px - a.x, wy = py - a.y;
    const double vv = vx * vx + vy * vy;
    double t = vv > 0.0 ? (wx * vx + wy * vy) / vv : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    const double dx = px - (a.x + t * vx);
    const double dy = py - (a.y + t * vy);
    return std::sqrt(dx * dx + dy * dy);
}

// Stroke a segment of the given width with a 1 px linear falloff, combining
// with existing content by max so joints do not over-brighten.
void stroke(Frame& img, Point a, Point b, double width) {
    const int h = img.dim(0), w = img.dim(1);
    const double half = 0.5 * width;
    const double pad = half + 1.0;
    const int r0 = std::max(0, static_cast<int>(std::floor(std::min(a.y, b.y) - pad)));
    const int r1 = std::min(h - 1, static_cast<int>(std::ceil(std::max(a.y, b.y) + pad)));
    const int c0 = std::max(0, static_cast<int>(std::floor(std::min(a.x, b.x) - pad)));
    const int c1 = std::min(w - 1, static_cast<int>(std::ceil(std::max(a.x, b.x) + pad)));
    for (int r = r0; r <= r1; ++r)
        for (int c = c0; c <= c1; ++c) {
            const double d = dist_to_segment(c + 0.5, r + 0.5, a, b);
            const double v = std::clamp(half + 0.5 - d, 0.0, 1.0);
            if (v > img.at(r, c)) img.at(r, c) = v;
        }
}

// Image direction of a link at angle q (q = 0 straight down, CCW positive):
// +x right, +row down.
Point link_dir(double q) { return {std::sin(q), std::cos(q)}; }

} // namespace

Frame render_frame(const SystemSpec& spec, const Tensor& q) {
    if (q.ndim() != 1 || q.dim(0) != spec.dof)
        throw UsageError("render_frame: configuration length does not match system dof");
    const int n = kFrameSize;
    Frame img({n, n});
    const double width = 3.0;
    if (spec.kind == SystemKind::pendulum) {
        const Point pivot{n / 2.0, n / 2.0};
        const double len = 12.0;
        const Point dir = link_dir(q[0]);
        stroke(img, pivot, {pivot.x + len * dir.x, pivot.y + len * dir.y}, width);
    } else {
        const Point pivot{n / 2.0, n / 3.0};
        const double len = 5.0;
        const Point d1 = link_dir(q[0]);
        const Point elbow{pivot.x + len * d1.x, pivot.y + len * d1.y};
        stroke(img, pivot, elbow, width);
        const Point d2 = link_dir(q[0] + q[1]);
        stroke(img, elbow, {elbow.x + len * d2.x, elbow.y + len * d2.y}, width);
    }
    return img;
}

std::vector<Observation> build_observations(const std::vector<Frame>& frames) {
    if (frames.size() < 3)
        throw UsageError("build_observations: need at least 3 frames, got " +
                         std::to_string(frames.size()));
    const int h = frames[0].dim(0), w = frames[0].dim(1);
    std::vector<Observation> out;
    out.reserve(frames.size() - 2);
    for (size_t t = 0; t + 2 < frames.size(); ++t) {
        Observation obs({3, h, w});
        for (int c = 0; c < 3; ++c) {
            const Frame& f = frames[t + static_cast<size_t>(c)];
            for (int64_t i = 0; i < f.size(); ++i) obs[static_cast<int64_t>(c) * h * w + i] = f[i];
        }
        out.push_back(std::move(obs));
    }
    return out;
}

} // namespace lagdyn::sim
