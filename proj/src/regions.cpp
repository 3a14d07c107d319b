#include "viewfuse/regions.hpp"

#include <deque>

namespace viewfuse {

RegionLabeling label_regions(const Mask& mask, int connectivity) {
    if (connectivity != 4 && connectivity != 8) throw DomainError("connectivity must be 4 or 8");
    const int rows = static_cast<int>(mask.rows()), cols = static_cast<int>(mask.cols());
    RegionLabeling out;
    out.label = Image<int>::Constant(rows, cols, -1);
    static const int dv[8] = {-1, 1, 0, 0, -1, -1, 1, 1};
    static const int du[8] = {0, 0, -1, 1, -1, 1, -1, 1};
    std::vector<std::pair<int, int>> stack;
    for (int v = 0; v < rows; ++v)
        for (int u = 0; u < cols; ++u) {
            if (!mask(v, u) || out.label(v, u) >= 0) continue;
            const int id = out.region_count();
            long size = 0;
            out.label(v, u) = id;
            stack.emplace_back(v, u);
            while (!stack.empty()) {
                const auto [cv, cu] = stack.back();
                stack.pop_back();
                ++size;
                for (int k = 0; k < connectivity; ++k) {
                    const int nv = cv + dv[k], nu = cu + du[k];
                    if (nv < 0 || nv >= rows || nu < 0 || nu >= cols) continue;
                    if (!mask(nv, nu) || out.label(nv, nu) >= 0) continue;
                    out.label(nv, nu) = id;
                    stack.emplace_back(nv, nu);
                }
            }
            out.sizes.push_back(size);
        }
    return out;
}

Image<int> l1_distance(const Mask& seeds, int max_distance) {
    const int rows = static_cast<int>(seeds.rows()), cols = static_cast<int>(seeds.cols());
    Image<int> dist = Image<int>::Constant(rows, cols, max_distance + 1);
    std::deque<std::pair<int, int>> queue;
    for (int v = 0; v < rows; ++v)
        for (int u = 0; u < cols; ++u)
            if (seeds(v, u)) {
                dist(v, u) = 0;
                queue.emplace_back(v, u);
            }
    static const int dv[4] = {-1, 1, 0, 0};
    static const int du[4] = {0, 0, -1, 1};
    while (!queue.empty()) {
        const auto [v, u] = queue.front();
        queue.pop_front();
        const int d = dist(v, u);
        if (d >= max_distance) continue;
        for (int k = 0; k < 4; ++k) {
            const int nv = v + dv[k], nu = u + du[k];
            if (nv < 0 || nv >= rows || nu < 0 || nu >= cols) continue;
            if (dist(nv, nu) <= d + 1) continue;
            dist(nv, nu) = d + 1;
            queue.emplace_back(nv, nu);
        }
    }
    return dist;
}

}  // namespace viewfuse
