#include "attention/mam_basis.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

#include "common/errors.hpp"
#include "tensor/ops.hpp"

namespace attn {

float mask_logit(float p) {
  const double q = std::clamp(static_cast<double>(p), static_cast<double>(kMaskClampEps),
                              1.0 - static_cast<double>(kMaskClampEps));
  return static_cast<float>(std::log(q / (1.0 - q)));
}

MamBasis fit_mam_basis(std::span<const Tensor> masks, int n, bool allow_degenerate) {
  if (n < 1) throw UsageError("fit_mam_basis: n must be >= 1");
  if (masks.size() < static_cast<std::size_t>(n) + 1) {
    throw UsageError("fit_mam_basis: need at least " + std::to_string(n + 1) + " masks, got " +
                     std::to_string(masks.size()));
  }
  const Shape& shape = masks.front().shape();
  if (shape.size() != 2) throw ShapeError("fit_mam_basis: masks must be H x W, got " + shape_str(shape));
  const int H = shape[0], W = shape[1];
  const Eigen::Index D = static_cast<Eigen::Index>(H) * W;
  if (n > D) throw UsageError("fit_mam_basis: n exceeds the map dimension");

  const auto count = static_cast<Eigen::Index>(masks.size());
  Eigen::MatrixXd X(count, D);
  for (Eigen::Index i = 0; i < count; ++i) {
    const Tensor& m = masks[static_cast<std::size_t>(i)];
    if (m.shape() != shape) throw ShapeError("fit_mam_basis: masks differ in shape");
    for (Eigen::Index j = 0; j < D; ++j) {
      const float v = m[static_cast<std::size_t>(j)];
      if (!(v >= 0.0f && v <= 1.0f)) throw UsageError("fit_mam_basis: mask values must lie in [0, 1]");
      X(i, j) = mask_logit(v);
    }
  }
  const Eigen::RowVectorXd mean = X.colwise().mean();
  const Eigen::MatrixXd centered = X.rowwise() - mean;
  const Eigen::MatrixXd cov = (centered.transpose() * centered) / static_cast<double>(count);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success) throw Error("fit_mam_basis: eigendecomposition failed");
  const Eigen::VectorXd& evals = solver.eigenvalues();  // ascending
  const Eigen::MatrixXd& evecs = solver.eigenvectors();

  const double top = evals(D - 1);
  const double nth = evals(D - n);
  if (!allow_degenerate && nth <= 1e-10 * std::max(top, 1.0)) {
    throw UsageError("fit_mam_basis: degenerate covariance (fewer than " + std::to_string(n) +
                     " non-zero principal directions)");
  }

  MamBasis out;
  out.height = H;
  out.width = W;
  out.n = n;
  out.mean = Tensor({H, W});
  for (Eigen::Index j = 0; j < D; ++j) out.mean[static_cast<std::size_t>(j)] = static_cast<float>(mean(j));
  out.basis = Tensor({static_cast<int>(D), n});
  for (int k = 0; k < n; ++k) {
    const Eigen::Index col = D - 1 - k;
    Eigen::VectorXd v = evecs.col(col);
    // sign convention: largest-magnitude entry (first on ties) is positive
    Eigen::Index arg = 0;
    for (Eigen::Index j = 1; j < D; ++j) {
      if (std::abs(v(j)) > std::abs(v(arg))) arg = j;
    }
    if (v(arg) < 0.0) v = -v;
    for (Eigen::Index j = 0; j < D; ++j) {
      out.basis[static_cast<std::size_t>(j) * static_cast<std::size_t>(n) + static_cast<std::size_t>(k)] =
          static_cast<float>(v(j));
    }
    out.eigenvalues.push_back(std::max(0.0, evals(col)));
  }
  return out;
}

Tensor project_to_span(const MamBasis& basis, const Tensor& logit_map) {
  const std::size_t D = basis.mean.size();
  const auto n = static_cast<std::size_t>(basis.n);
  if (logit_map.size() != D) throw ShapeError("project_to_span: map size does not match basis");
  std::vector<double> centered(D);
  for (std::size_t j = 0; j < D; ++j) centered[j] = static_cast<double>(logit_map[j]) - basis.mean[j];
  std::vector<double> coef(n, 0.0);
  for (std::size_t j = 0; j < D; ++j) {
    for (std::size_t k = 0; k < n; ++k) coef[k] += basis.basis[j * n + k] * centered[j];
  }
  Tensor out(logit_map.shape());
  for (std::size_t j = 0; j < D; ++j) {
    double v = basis.mean[j];
    for (std::size_t k = 0; k < n; ++k) v += basis.basis[j * n + k] * coef[k];
    out[j] = static_cast<float>(v);
  }
  return out;
}

Tensor reconstruct_mask(const MamBasis& basis, const Tensor& mask) {
  Tensor logits(mask.shape());
  for (std::size_t j = 0; j < mask.size(); ++j) logits[j] = mask_logit(mask[j]);
  Tensor projected = project_to_span(basis, logits);
  for (auto& v : projected.data()) v = sigmoid_value(v);
  return projected;
}

std::vector<NamedTensor> basis_tensors(const MamBasis& basis, const std::string& prefix) {
  return {{prefix + "mean", basis.mean}, {prefix + "basis", basis.basis}};
}

MamBasis basis_from_tensors(const std::vector<NamedTensor>& tensors, const std::string& prefix) {
  MamBasis b;
  b.mean = find_tensor(tensors, prefix + "mean");
  b.basis = find_tensor(tensors, prefix + "basis");
  if (b.mean.ndim() != 2 || b.basis.ndim() != 2 ||
      static_cast<std::size_t>(b.basis.dim(0)) != b.mean.size() || b.basis.dim(1) < 1) {
    throw FormatError("MAM basis: inconsistent mean " + shape_str(b.mean.shape()) + " and basis " +
                      shape_str(b.basis.shape()));
  }
  b.height = b.mean.dim(0);
  b.width = b.mean.dim(1);
  b.n = b.basis.dim(1);
  return b;
}

void save_basis(const std::string& path, const MamBasis& basis) { write_atnt(path, basis_tensors(basis)); }

MamBasis load_basis(const std::string& path) { return basis_from_tensors(read_atnt(path)); }

}  // namespace attn
