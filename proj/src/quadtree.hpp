#pragma once

#include <cstdint>
#include <vector>

namespace rptsne {

// Quadtree over 2-D points for Barnes-Hut repulsion. Cells are squares;
// a cell is summarised as (count, center of mass) when
// side^2 < theta^2 * dist^2, otherwise opened. Coincident points pool
// in a terminal leaf once the depth cap is reached and are then handled
// pairwise, so duplicates never recurse unboundedly.
class QuadTree {
public:
    QuadTree(const double* yx, const double* yy, std::size_t n);

    bool degenerate() const { return degenerate_; }

    // Adds the repulsive sums for query point i:
    //   z     += sum_j w_ij,  rep += sum_j w_ij^2 (y_i - y_j)
    // over j != i, with far cells collapsed per theta.
    void accumulate(std::size_t i, double theta, double& rep_x, double& rep_y, double& z) const;

private:
    struct Node {
        double cx = 0.0, cy = 0.0, half = 0.0;
        double com_x = 0.0, com_y = 0.0;  // running sum, finalised to mean
        std::uint32_t count = 0;
        std::int32_t child[4] = {-1, -1, -1, -1};
        std::vector<std::uint32_t> points;
        bool is_leaf = true;
    };

    static constexpr int kMaxDepth = 52;

    std::int32_t make_node(double cx, double cy, double half);
    std::int32_t child_for(std::int32_t node, double x, double y, bool create);

    const double* yx_;
    const double* yy_;
    std::size_t n_;
    bool degenerate_ = false;
    std::vector<Node> nodes_;
};

}  // namespace rptsne
