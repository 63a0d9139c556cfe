#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <functional>
#include <numeric>
#include <vector>

namespace bomf::detail {

struct NelderMeadResult {
    Eigen::VectorXd x;
    double value = 0.0;
    int evals = 0;
};

// Minimizes f from x0 with an axis-aligned initial simplex of edge `step`.
// Standard reflection/expansion/contraction/shrink coefficients (1, 2, 1/2, 1/2).
inline NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                                    const Eigen::VectorXd& x0, double step, int max_evals,
                                    double ftol = 1e-10) {
    const auto n = x0.size();
    std::vector<Eigen::VectorXd> pts(static_cast<std::size_t>(n + 1), x0);
    std::vector<double> vals(static_cast<std::size_t>(n + 1));
    int evals = 0;
    auto eval = [&](const Eigen::VectorXd& x) {
        ++evals;
        return f(x);
    };
    for (Eigen::Index i = 0; i < n; ++i) pts[static_cast<std::size_t>(i + 1)](i) += step;
    for (std::size_t i = 0; i < pts.size(); ++i) vals[i] = eval(pts[i]);

    std::vector<std::size_t> order(pts.size());
    while (evals < max_evals) {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return vals[a] < vals[b]; });
        const auto best = order.front(), worst = order.back(), second = order[order.size() - 2];
        if (std::abs(vals[worst] - vals[best]) <= ftol * (1.0 + std::abs(vals[best]))) break;

        Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
        for (std::size_t i = 0; i < pts.size(); ++i)
            if (i != worst) centroid += pts[i];
        centroid /= static_cast<double>(n);

        const Eigen::VectorXd reflected = centroid + (centroid - pts[worst]);
        const double fr = eval(reflected);
        if (fr < vals[best]) {
            const Eigen::VectorXd expanded = centroid + 2.0 * (centroid - pts[worst]);
            const double fe = eval(expanded);
            if (fe < fr) {
                pts[worst] = expanded;
                vals[worst] = fe;
            } else {
                pts[worst] = reflected;
                vals[worst] = fr;
            }
            continue;
        }
        if (fr < vals[second]) {
            pts[worst] = reflected;
            vals[worst] = fr;
            continue;
        }
        const bool outside = fr < vals[worst];
        const Eigen::VectorXd contracted =
            outside ? Eigen::VectorXd(centroid + 0.5 * (reflected - centroid))
                    : Eigen::VectorXd(centroid + 0.5 * (pts[worst] - centroid));
        const double fc = eval(contracted);
        if (fc < (outside ? fr : vals[worst])) {
            pts[worst] = contracted;
            vals[worst] = fc;
            continue;
        }
        for (std::size_t i = 0; i < pts.size(); ++i) {
            if (i == best) continue;
            pts[i] = pts[best] + 0.5 * (pts[i] - pts[best]);
            vals[i] = eval(pts[i]);
        }
    }
    const auto it = std::min_element(vals.begin(), vals.end());
    const auto idx = static_cast<std::size_t>(std::distance(vals.begin(), it));
    return {pts[idx], vals[idx], evals};
}

} // namespace bomf::detail
