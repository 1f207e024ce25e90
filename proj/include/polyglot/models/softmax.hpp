#pragma once

#include <span>
#include <vector>

namespace polyglot::models {

// softmax with max-subtraction; throws on non-finite inputs
std::vector<double> softmax(std::span<const double> scores);

// -log softmax(scores)[label]
double softmax_log_loss(std::span<const double> scores, int label);

// Per-class gradient and hessian of the softmax log-loss:
//   g_k = p_k - [k == label],  h_k = p_k (1 - p_k)
void softmax_grad_hess(std::span<const double> scores, int label, std::span<double> grad,
                       std::span<double> hess);

}  // namespace polyglot::models
