#include "quadtree.hpp"

#include <algorithm>
#include <cmath>

namespace rptsne {

QuadTree::QuadTree(const double* yx, const double* yy, std::size_t n) : yx_(yx), yy_(yy), n_(n) {
    double min_x = yx[0], max_x = yx[0], min_y = yy[0], max_y = yy[0];
    for (std::size_t i = 1; i < n; ++i) {
        min_x = std::min(min_x, yx[i]);
        max_x = std::max(max_x, yx[i]);
        min_y = std::min(min_y, yy[i]);
        max_y = std::max(max_y, yy[i]);
    }
    const double extent = std::max(max_x - min_x, max_y - min_y);
    if (extent <= 0.0) {
        degenerate_ = true;
        return;
    }
    nodes_.reserve(2 * n);
    const double half = 0.5 * extent * (1.0 + 1e-9) + 1e-300;
    make_node(0.5 * (min_x + max_x), 0.5 * (min_y + max_y), half);

    for (std::size_t i = 0; i < n; ++i) {
        const double x = yx[i];
        const double y = yy[i];
        std::int32_t cur = 0;
        int depth = 0;
        for (;;) {
            Node& node = nodes_[cur];
            node.count += 1;
            node.com_x += x;
            node.com_y += y;
            if (!node.is_leaf) {
                cur = child_for(cur, x, y, true);
                ++depth;
                continue;
            }
            if (node.points.empty() || depth >= kMaxDepth) {
                node.points.push_back(static_cast<std::uint32_t>(i));
                break;
            }
            // split: push the resident point one level down, then retry
            const std::uint32_t resident = node.points[0];
            node.points.clear();
            node.is_leaf = false;
            const std::int32_t dest = child_for(cur, yx_[resident], yy_[resident], true);
            Node& dn = nodes_[dest];
            dn.count += 1;
            dn.com_x += yx_[resident];
            dn.com_y += yy_[resident];
            dn.points.push_back(resident);
            cur = child_for(cur, x, y, true);
            ++depth;
        }
    }
    for (Node& node : nodes_) {
        node.com_x /= node.count;
        node.com_y /= node.count;
    }
}

std::int32_t QuadTree::make_node(double cx, double cy, double half) {
    nodes_.emplace_back();
    Node& n = nodes_.back();
    n.cx = cx;
    n.cy = cy;
    n.half = half;
    return static_cast<std::int32_t>(nodes_.size() - 1);
}

std::int32_t QuadTree::child_for(std::int32_t node, double x, double y, bool create) {
    const Node& n = nodes_[node];
    const int q = (x >= n.cx ? 1 : 0) | (y >= n.cy ? 2 : 0);
    std::int32_t c = n.child[q];
    if (c < 0 && create) {
        const double h = 0.5 * n.half;
        const double cx = n.cx + (q & 1 ? h : -h);
        const double cy = n.cy + (q & 2 ? h : -h);
        c = make_node(cx, cy, h);
        nodes_[node].child[q] = c;
    }
    return c;
}

void QuadTree::accumulate(std::size_t i, double theta, double& rep_x, double& rep_y,
                          double& z) const {
    const double qx = yx_[i];
    const double qy = yy_[i];
    const double theta2 = theta * theta;
    std::int32_t stack[256];  // bounded by 3*kMaxDepth + 4 frames
    int top = 0;
    stack[top++] = 0;
    while (top > 0) {
        const Node& node = nodes_[stack[--top]];
        if (node.is_leaf) {
            for (const std::uint32_t j : node.points) {
                if (j == i) continue;
                const double dx = qx - yx_[j];
                const double dy = qy - yy_[j];
                const double w = 1.0 / (1.0 + dx * dx + dy * dy);
                z += w;
                const double w2 = w * w;
                rep_x += w2 * dx;
                rep_y += w2 * dy;
            }
            continue;
        }
        const double dx = qx - node.com_x;
        const double dy = qy - node.com_y;
        const double d2 = dx * dx + dy * dy;
        const double side = 2.0 * node.half;
        if (side * side < theta2 * d2) {
            const double w = 1.0 / (1.0 + d2);
            const double cw = static_cast<double>(node.count) * w;
            z += cw;
            const double cw2 = cw * w;
            rep_x += cw2 * dx;
            rep_y += cw2 * dy;
            continue;
        }
        for (const std::int32_t c : node.child) {
            if (c >= 0) stack[top++] = c;
        }
    }
}

}  // namespace rptsne
