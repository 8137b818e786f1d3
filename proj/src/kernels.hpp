#pragma once

#include <span>
#include <string>
#include <string_view>

#include "chem.hpp"
#include "numerics.hpp"

namespace dppmb::kernels {

enum class KernelVariant { dpp_t, dpp_a, dpp_p, dpp_d };

KernelVariant variant_from_string(std::string_view name);
std::string_view to_string(KernelVariant v);

struct KernelMatrix {
  numerics::SymMatrix mat;
  KernelVariant variant = KernelVariant::dpp_t;
  double ridge = 0.0;  // regularization already folded into mat

  explicit KernelMatrix(numerics::SymMatrix m,
                        KernelVariant v = KernelVariant::dpp_t)
      : mat(std::move(m)), variant(v) {}
};

// Pairwise Tanimoto similarity of molecule fingerprints; unit diagonal.
// The batch must be nonempty and deduplicated by token sequence.
KernelMatrix tanimoto_matrix(std::span<const chem::Molecule> batch);

// Pairwise Dice similarity of scaffold atom-pair counts; unit diagonal.
KernelMatrix dice_matrix(std::span<const chem::Molecule> batch);

// DPP-T -> lt, DPP-A -> lt + ld, DPP-P -> lt (.) ld, DPP-D -> ld.
KernelMatrix combine(KernelVariant v, const KernelMatrix& lt, const KernelMatrix& ld);

// L'[i][j] = q_i * L[i][j] * q_j with all q_i > 0.
KernelMatrix apply_quality(const KernelMatrix& l, std::span<const double> quality);

// Kernel dump: first line N, then N whitespace-separated rows of N reals.
void write_kernel_file(const std::string& path, const numerics::SymMatrix& m);
numerics::SymMatrix read_kernel_file(const std::string& path);

}  // namespace dppmb::kernels
