#pragma once

#include <span>
#include <string>
#include <vector>

#include "tensor/atnt.hpp"
#include "tensor/tensor.hpp"

namespace attn {

/// Statistical map model: a logit-space mean map plus n orthonormal basis
/// maps, fitted by PCA over ground-truth masks. Frozen after fitting.
struct MamBasis {
  int height = 0;
  int width = 0;
  int n = 0;
  Tensor mean;   // height x width, logit space
  Tensor basis;  // (height * width) x n, columns orthonormal
  std::vector<double> eigenvalues;  // descending, first n; empty when loaded from disk
};

/// Probabilities are clamped to [eps, 1 - eps] before the logit.
inline constexpr float kMaskClampEps = 0.01f;

float mask_logit(float p);

/// Fits the basis from masks (each height x width, values in [0, 1]). Needs at
/// least n + 1 masks. If the covariance has fewer than n non-negligible
/// directions this throws "degenerate covariance" unless allow_degenerate.
MamBasis fit_mam_basis(std::span<const Tensor> masks, int n = 10, bool allow_degenerate = false);

/// Orthogonal projection of a logit-space map onto mean + span(basis).
Tensor project_to_span(const MamBasis& basis, const Tensor& logit_map);

/// sigmoid(mean + A A^T (logit(mask) - mean)), shaped like `mask`.
Tensor reconstruct_mask(const MamBasis& basis, const Tensor& mask);

/// Tensors "mean" (H x W) and "basis" ((H*W) x n), names prefixed.
std::vector<NamedTensor> basis_tensors(const MamBasis& basis, const std::string& prefix = "");
MamBasis basis_from_tensors(const std::vector<NamedTensor>& tensors, const std::string& prefix = "");

void save_basis(const std::string& path, const MamBasis& basis);
MamBasis load_basis(const std::string& path);

}  // namespace attn
