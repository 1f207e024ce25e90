#include "polyglot/models/softmax.hpp"

#include <algorithm>
#include <cmath>

#include "polyglot/util/errors.hpp"

namespace polyglot::models {

std::vector<double> softmax(std::span<const double> scores) {
    double mx = -std::numeric_limits<double>::infinity();
    for (const double s : scores) {
        if (!std::isfinite(s)) throw DataError("softmax: non-finite score");
        mx = std::max(mx, s);
    }
    std::vector<double> p(scores.size());
    double z = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        p[i] = std::exp(scores[i] - mx);
        z += p[i];
    }
    for (double& v : p) v /= z;
    return p;
}

double softmax_log_loss(std::span<const double> scores, int label) {
    double mx = -std::numeric_limits<double>::infinity();
    for (const double s : scores) mx = std::max(mx, s);
    double z = 0.0;
    for (const double s : scores) z += std::exp(s - mx);
    return std::log(z) - (scores[static_cast<std::size_t>(label)] - mx);
}

void softmax_grad_hess(std::span<const double> scores, int label, std::span<double> grad,
                       std::span<double> hess) {
    const auto p = softmax(scores);
    for (std::size_t k = 0; k < p.size(); ++k) {
        grad[k] = p[k] - (static_cast<int>(k) == label ? 1.0 : 0.0);
        hess[k] = p[k] * (1.0 - p[k]);
    }
}

}  // namespace polyglot::models
