#pragma once

#include <utility>

#include "bevlift/tensor.hpp"

namespace bevlift {

// Per-pixel categorical depth distributions and the frustum feature grid.
// Distributions are W x H x K tensors (K = bin count, including the overflow
// bin when present); image features are W x H x C; the frustum grid is
// W x H x D x C.

// Max-stabilized per-pixel softmax over the last axis. Throws NonFiniteInput.
template <typename T>
BasicTensor<T> softmax_normalize(const BasicTensor<T>& logits);

// Slices off the trailing overflow bin without renormalizing: probability
// mass assigned out of range simply vanishes from the frustum. num_bins is
// the expected bin count after the drop; throws WrongBinCount when the input
// does not hold exactly num_bins + 1 bins.
template <typename T>
BasicTensor<T> drop_overflow_bin(const BasicTensor<T>& dist, int num_bins);

// Per-pixel outer product: out[u,v,d,c] = dist[u,v,d] * features[u,v,c].
template <typename T>
BasicTensor<T> lift(const BasicTensor<T>& dist, const BasicTensor<T>& features);

// Gradients of lift w.r.t. the distribution and the features.
template <typename T>
std::pair<BasicTensor<T>, BasicTensor<T>> lift_backward(
    const BasicTensor<T>& dist, const BasicTensor<T>& features,
    const BasicTensor<T>& upstream);

// Softmax Jacobian-vector product per pixel:
// grad_l[k] = dist[k] * (upstream[k] - sum_j upstream[j] * dist[j]).
template <typename T>
BasicTensor<T> softmax_backward(const BasicTensor<T>& dist,
                                const BasicTensor<T>& upstream);

// Checks the distribution invariants: entries in [0, 1] and per-pixel sums
// equal to 1 within tol. Throws NotNormalized / OutOfRange.
template <typename T>
void validate_distribution(const BasicTensor<T>& dist, double tol = 1e-5);

}  // namespace bevlift
