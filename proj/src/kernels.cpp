#include "kernels.hpp"

#include <fstream>
#include <sstream>

#include "error.hpp"
#include "textio.hpp"

namespace dppmb::kernels {

KernelVariant variant_from_string(std::string_view name) {
  if (name == "dpp-t") return KernelVariant::dpp_t;
  if (name == "dpp-a") return KernelVariant::dpp_a;
  if (name == "dpp-p") return KernelVariant::dpp_p;
  if (name == "dpp-d") return KernelVariant::dpp_d;
  fail_arg("unknown kernel variant: " + std::string(name));
}

std::string_view to_string(KernelVariant v) {
  switch (v) {
    case KernelVariant::dpp_t: return "dpp-t";
    case KernelVariant::dpp_a: return "dpp-a";
    case KernelVariant::dpp_p: return "dpp-p";
    case KernelVariant::dpp_d: return "dpp-d";
  }
  return "?";
}

KernelMatrix tanimoto_matrix(std::span<const chem::Molecule> batch) {
  if (batch.empty()) fail_arg("kernel batch must be nonempty");
  const int n = static_cast<int>(batch.size());
  numerics::SymMatrix m(n);
  for (int i = 0; i < n; ++i) {
    m.set(i, i, 1.0);
    for (int j = i + 1; j < n; ++j)
      m.set(i, j, chem::tanimoto(batch[i].fingerprint(), batch[j].fingerprint()));
  }
  return KernelMatrix(std::move(m), KernelVariant::dpp_t);
}

KernelMatrix dice_matrix(std::span<const chem::Molecule> batch) {
  if (batch.empty()) fail_arg("kernel batch must be nonempty");
  const int n = static_cast<int>(batch.size());
  numerics::SymMatrix m(n);
  for (int i = 0; i < n; ++i) {
    m.set(i, i, 1.0);
    for (int j = i + 1; j < n; ++j)
      m.set(i, j, chem::dice(batch[i].scaffold_pairs(), batch[j].scaffold_pairs()));
  }
  return KernelMatrix(std::move(m), KernelVariant::dpp_d);
}

KernelMatrix combine(KernelVariant v, const KernelMatrix& lt, const KernelMatrix& ld) {
  const int n = lt.mat.dim();
  if (ld.mat.dim() != n)
    fail_arg("kernel dimension mismatch: " + std::to_string(n) + " vs " +
             std::to_string(ld.mat.dim()));
  switch (v) {
    case KernelVariant::dpp_t: {
      KernelMatrix out = lt;
      out.variant = v;
      return out;
    }
    case KernelVariant::dpp_d: {
      KernelMatrix out = ld;
      out.variant = v;
      return out;
    }
    case KernelVariant::dpp_a: {
      numerics::SymMatrix m(n);
      for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) m.set(i, j, lt.mat.at(i, j) + ld.mat.at(i, j));
      return KernelMatrix(std::move(m), v);
    }
    case KernelVariant::dpp_p: {
      numerics::SymMatrix m(n);
      for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) m.set(i, j, lt.mat.at(i, j) * ld.mat.at(i, j));
      return KernelMatrix(std::move(m), v);
    }
  }
  fail_arg("unknown kernel variant");
}

KernelMatrix apply_quality(const KernelMatrix& l, std::span<const double> quality) {
  const int n = l.mat.dim();
  if (quality.size() != static_cast<size_t>(n))
    fail_arg("quality vector length " + std::to_string(quality.size()) +
             " does not match kernel dimension " + std::to_string(n));
  for (double q : quality)
    if (!(q > 0.0)) fail_arg("quality terms must be positive");

  numerics::SymMatrix m(n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j)
      m.set(i, j, quality[i] * l.mat.at(i, j) * quality[j]);
  KernelMatrix out(std::move(m), l.variant);
  out.ridge = l.ridge;
  return out;
}

void write_kernel_file(const std::string& path, const numerics::SymMatrix& m) {
  std::ostringstream ss;
  const int n = m.dim();
  ss << n << '\n';
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (j) ss << ' ';
      ss << textio::format_double(m.at(i, j));
    }
    ss << '\n';
  }
  textio::write_file(path, ss.str());
}

numerics::SymMatrix read_kernel_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail_io("cannot open kernel file: " + path);
  long n = 0;
  if (!(in >> n) || n < 1)
    fail_parse("kernel file " + path + ": expected dimension on first line");
  std::vector<double> entries;
  entries.reserve(static_cast<size_t>(n) * n);
  double v = 0.0;
  while (entries.size() < static_cast<size_t>(n) * n && (in >> v))
    entries.push_back(v);
  if (entries.size() != static_cast<size_t>(n) * n)
    fail_parse("kernel file " + path + ": expected " + std::to_string(n * n) +
               " entries, found " + std::to_string(entries.size()));
  return numerics::SymMatrix::from_rowmajor(static_cast<int>(n), entries);
}

}  // namespace dppmb::kernels
