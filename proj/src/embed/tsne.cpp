#include "polyglot/embed/tsne.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <string>

#include "polyglot/util/errors.hpp"
#include "polyglot/util/hash.hpp"
#include "polyglot/util/rng.hpp"

namespace polyglot::embed {

namespace {

constexpr double kTiny = 1e-12;

std::vector<double> pairwise_sq_dists(const std::vector<std::vector<double>>& x) {
    const std::size_t n = x.size();
    std::vector<double> d2(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < x[i].size(); ++k) {
                const double diff = x[i][k] - x[j][k];
                s += diff * diff;
            }
            d2[i * n + j] = s;
            d2[j * n + i] = s;
        }
    }
    return d2;
}

}  // namespace

std::vector<double> tsne_affinities(const std::vector<std::vector<double>>& vectors,
                                    double perplexity) {
    const std::size_t n = vectors.size();
    if (static_cast<double>(n) <= 3.0 * perplexity)
        throw ConfigError("tsne: need more than " +
                          std::to_string(static_cast<int>(3.0 * perplexity)) +
                          " points for perplexity " + std::to_string(perplexity) + ", got " +
                          std::to_string(n));
    const auto d2 = pairwise_sq_dists(vectors);
    bool any_distinct = false;
    for (const double d : d2)
        if (d > 0.0) { any_distinct = true; break; }
    if (!any_distinct) throw DataError("tsne: all points are identical");

    const double target_entropy = std::log(perplexity);
    std::vector<double> cond(n * n, 0.0);  // P(j | i)
    std::vector<double> row(n);
    for (std::size_t i = 0; i < n; ++i) {
        double beta = 1.0;
        double beta_lo = -std::numeric_limits<double>::infinity();
        double beta_hi = std::numeric_limits<double>::infinity();
        for (int it = 0; it < 200; ++it) {
            double sum = 0.0;
            double weighted = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                row[j] = (j == i) ? 0.0 : std::exp(-beta * d2[i * n + j]);
                sum += row[j];
                weighted += row[j] * d2[i * n + j];
            }
            if (sum <= 0.0) sum = kTiny;
            const double entropy = std::log(sum) + beta * weighted / sum;
            const double diff = entropy - target_entropy;
            if (std::abs(diff) < 1e-5) break;
            if (diff > 0.0) {
                beta_lo = beta;
                beta = std::isinf(beta_hi) ? beta * 2.0 : (beta + beta_hi) / 2.0;
            } else {
                beta_hi = beta;
                beta = std::isinf(beta_lo) ? beta / 2.0 : (beta + beta_lo) / 2.0;
            }
        }
        double sum = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            row[j] = (j == i) ? 0.0 : std::exp(-beta * d2[i * n + j]);
            sum += row[j];
        }
        if (sum <= 0.0) sum = kTiny;
        for (std::size_t j = 0; j < n; ++j) cond[i * n + j] = row[j] / sum;
    }

    std::vector<double> p(n * n, 0.0);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            p[i * n + j] = cond[i * n + j] + cond[j * n + i];
            total += p[i * n + j];
        }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            p[i * n + j] = (i == j) ? 0.0 : std::max(p[i * n + j] / total, kTiny);
    return p;
}

namespace {

// Student-t kernel weights and their normalizer for the current layout.
void layout_kernel(const std::vector<std::array<double, 2>>& y, std::vector<double>& w,
                   double& total) {
    const std::size_t n = y.size();
    total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        w[i * n + i] = 0.0;
        for (std::size_t j = i + 1; j < n; ++j) {
            const double dx = y[i][0] - y[j][0];
            const double dy = y[i][1] - y[j][1];
            const double v = 1.0 / (1.0 + dx * dx + dy * dy);
            w[i * n + j] = v;
            w[j * n + i] = v;
            total += 2.0 * v;
        }
    }
    if (total <= 0.0) total = kTiny;
}

}  // namespace

double tsne_kl(const std::vector<double>& affinities,
               const std::vector<std::array<double, 2>>& layout) {
    const std::size_t n = layout.size();
    std::vector<double> w(n * n);
    double total = 0.0;
    layout_kernel(layout, w, total);
    double kl = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            const double p = affinities[i * n + j];
            const double q = std::max(w[i * n + j] / total, kTiny);
            if (p > 0.0) kl += p * std::log(p / q);
        }
    return kl;
}

std::vector<std::array<double, 2>> tsne_gradient(const std::vector<double>& affinities,
                                                 const std::vector<std::array<double, 2>>& layout) {
    const std::size_t n = layout.size();
    std::vector<double> w(n * n);
    double total = 0.0;
    layout_kernel(layout, w, total);
    std::vector<std::array<double, 2>> grad(n, {0.0, 0.0});
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            const double q = std::max(w[i * n + j] / total, kTiny);
            const double mult = 4.0 * (affinities[i * n + j] - q) * w[i * n + j];
            grad[i][0] += mult * (layout[i][0] - layout[j][0]);
            grad[i][1] += mult * (layout[i][1] - layout[j][1]);
        }
    return grad;
}

Projection2D tsne_project(const std::vector<std::vector<double>>& vectors,
                          const TsneParams& params) {
    const std::size_t n = vectors.size();
    const auto p = tsne_affinities(vectors, params.perplexity);

    Projection2D proj;
    proj.points.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        // content-based init: permuting input rows permutes the layout
        std::string bytes(reinterpret_cast<const char*>(vectors[i].data()),
                          vectors[i].size() * sizeof(double));
        Rng rng(mix_seed(params.seed, fnv1a64(bytes)));
        proj.points[i] = {rng.gaussian() * 1e-4, rng.gaussian() * 1e-4};
    }

    std::vector<double> p_run(p.size());
    std::vector<std::array<double, 2>> velocity(n, {0.0, 0.0});
    std::vector<std::array<double, 2>> gain(n, {1.0, 1.0});
    proj.kl_trace.push_back(tsne_kl(p, proj.points));
    for (int it = 0; it < params.iterations; ++it) {
        const bool exaggerate = it < params.exaggeration_iters;
        const double momentum = exaggerate ? 0.5 : 0.8;
        if (exaggerate) {
            for (std::size_t i = 0; i < p.size(); ++i) p_run[i] = p[i] * params.early_exaggeration;
        } else {
            p_run = p;
        }
        const auto grad = tsne_gradient(p_run, proj.points);
        double mean_x = 0.0, mean_y = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            for (int d = 0; d < 2; ++d) {
                // per-coordinate gains keep the fixed step size stable
                const bool same_dir = (grad[i][static_cast<std::size_t>(d)] > 0.0) ==
                                      (velocity[i][static_cast<std::size_t>(d)] > 0.0);
                auto& g = gain[i][static_cast<std::size_t>(d)];
                g = same_dir ? g * 0.8 : g + 0.2;
                if (g < 0.01) g = 0.01;
                auto& vel = velocity[i][static_cast<std::size_t>(d)];
                vel = momentum * vel -
                      params.learning_rate * g * grad[i][static_cast<std::size_t>(d)];
                proj.points[i][static_cast<std::size_t>(d)] += vel;
            }
            mean_x += proj.points[i][0];
            mean_y += proj.points[i][1];
        }
        mean_x /= static_cast<double>(n);
        mean_y /= static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i) {
            proj.points[i][0] -= mean_x;
            proj.points[i][1] -= mean_y;
        }
        if ((it + 1) % params.record_every == 0 || it + 1 == params.iterations)
            proj.kl_trace.push_back(tsne_kl(p, proj.points));
    }
    return proj;
}

}  // namespace polyglot::embed
