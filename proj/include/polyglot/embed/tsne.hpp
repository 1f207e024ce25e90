#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace polyglot::embed {

struct TsneParams {
    double perplexity = 30.0;
    int iterations = 1000;
    double learning_rate = 200.0;
    double early_exaggeration = 12.0;
    int exaggeration_iters = 250;  // momentum also steps 0.5 -> 0.8 here
    std::uint64_t seed = 0;
    int record_every = 50;
};

struct Projection2D {
    std::vector<std::array<double, 2>> points;
    std::vector<double> kl_trace;  // KL against the unexaggerated affinities
};

// Symmetrized input affinities: per-point bandwidths found by binary search
// until the conditional distribution's entropy matches log(perplexity)
// within 1e-5. Returned row-major N x N with zero diagonal, summing to 1.
std::vector<double> tsne_affinities(const std::vector<std::vector<double>>& vectors,
                                    double perplexity);

double tsne_kl(const std::vector<double>& affinities,
               const std::vector<std::array<double, 2>>& layout);

std::vector<std::array<double, 2>> tsne_gradient(const std::vector<double>& affinities,
                                                 const std::vector<std::array<double, 2>>& layout);

// Exact (quadratic) t-SNE to 2-D with momentum gradient descent. Each
// point's initial coordinates are seeded from (seed, hash of the point's
// values), so permuting the input rows permutes the output rows.
// Requires vectors.size() > 3 * perplexity and at least two distinct points.
Projection2D tsne_project(const std::vector<std::vector<double>>& vectors,
                          const TsneParams& params);

}  // namespace polyglot::embed
