#include "dppmb.h"

#include <cstring>
#include <string>

#include "agent.hpp"
#include "chem.hpp"
#include "dpp.hpp"
#include "error.hpp"
#include "harness.hpp"
#include "kernels.hpp"
#include "metrics.hpp"
#include "numerics.hpp"
#include "oracle.hpp"
#include "rng.hpp"

// Opaque handle definitions. The C surface owns plain wrappers around the
// core types; every entry point catches and translates exceptions.

struct dppmb_kernel {
  dppmb::kernels::KernelMatrix kernel;
};

struct dppmb_sampler {
  dppmb::dpp::KdppSampler sampler;
};

struct dppmb_config {
  dppmb::harness::RunConfig config;
};

namespace {

thread_local std::string g_last_error;

dppmb_status status_of(const dppmb::Error& e) {
  switch (e.kind()) {
    case dppmb::ErrorKind::invalid_argument: return DPPMB_EINVAL;
    case dppmb::ErrorKind::numeric: return DPPMB_ENUMERIC;
    case dppmb::ErrorKind::io: return DPPMB_EIO;
    case dppmb::ErrorKind::parse: return DPPMB_EPARSE;
  }
  return DPPMB_EINVAL;
}

template <typename Fn>
dppmb_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return DPPMB_OK;
  } catch (const dppmb::Error& e) {
    g_last_error = e.what();
    return status_of(e);
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return DPPMB_EINVAL;
  }
}

dppmb_status require(bool ok, const char* message) {
  if (ok) return DPPMB_OK;
  g_last_error = message;
  return DPPMB_EINVAL;
}

}  // namespace

extern "C" {

const char* dppmb_version(void) { return "1.0.0"; }

const char* dppmb_last_error(void) { return g_last_error.c_str(); }

dppmb_status dppmb_kernel_from_dense(int32_t n, const double* rowmajor,
                                     dppmb_kernel** out) {
  if (auto s = require(rowmajor && out, "null argument")) return s;
  return guarded([&] {
    auto m = dppmb::numerics::SymMatrix::from_rowmajor(
        n, std::span<const double>(rowmajor, static_cast<size_t>(n) * n));
    *out = new dppmb_kernel{dppmb::kernels::KernelMatrix(std::move(m))};
  });
}

dppmb_status dppmb_kernel_read(const char* path, dppmb_kernel** out) {
  if (auto s = require(path && out, "null argument")) return s;
  return guarded([&] {
    auto m = dppmb::kernels::read_kernel_file(path);
    *out = new dppmb_kernel{dppmb::kernels::KernelMatrix(std::move(m))};
  });
}

dppmb_status dppmb_kernel_from_fingerprints(const char* path, dppmb_kernel** out) {
  if (auto s = require(path && out, "null argument")) return s;
  return guarded([&] {
    const auto records = dppmb::chem::load_fingerprint_file(path);
    if (records.empty())
      dppmb::fail_arg("fingerprint file has no records: " + std::string(path));
    const int n = static_cast<int>(records.size());
    dppmb::numerics::SymMatrix m(n);
    for (int i = 0; i < n; ++i) {
      m.set(i, i, 1.0);
      for (int j = i + 1; j < n; ++j)
        m.set(i, j,
              dppmb::chem::tanimoto(records[i].second, records[j].second));
    }
    *out = new dppmb_kernel{dppmb::kernels::KernelMatrix(std::move(m))};
  });
}

int32_t dppmb_kernel_dim(const dppmb_kernel* k) {
  return k ? k->kernel.mat.dim() : 0;
}

void dppmb_kernel_free(dppmb_kernel* k) { delete k; }

dppmb_status dppmb_sampler_new(const dppmb_kernel* kernel, int32_t k,
                               dppmb_sampler** out) {
  if (auto s = require(kernel && out, "null argument")) return s;
  return guarded([&] {
    *out = new dppmb_sampler{dppmb::dpp::KdppSampler(kernel->kernel, k)};
  });
}

dppmb_status dppmb_sampler_draw(const dppmb_sampler* s, uint64_t seed,
                                uint64_t stream, int32_t* out_indices) {
  if (auto st = require(s && out_indices, "null argument")) return st;
  return guarded([&] {
    dppmb::Rng rng(seed, stream);
    const auto items = s->sampler.sample(rng);
    for (size_t i = 0; i < items.size(); ++i)
      out_indices[i] = static_cast<int32_t>(items[i]);
  });
}

int32_t dppmb_sampler_k(const dppmb_sampler* s) { return s ? s->sampler.k() : 0; }

void dppmb_sampler_free(dppmb_sampler* s) { delete s; }

dppmb_status dppmb_config_new(dppmb_config** out) {
  if (auto s = require(out != nullptr, "null argument")) return s;
  return guarded([&] { *out = new dppmb_config{}; });
}

dppmb_status dppmb_config_load(dppmb_config* c, const char* path) {
  if (auto s = require(c && path, "null argument")) return s;
  return guarded([&] { c->config.load_file(path); });
}

dppmb_status dppmb_config_set(dppmb_config* c, const char* key, const char* value) {
  if (auto s = require(c && key && value, "null argument")) return s;
  return guarded([&] { c->config.set(key, value); });
}

dppmb_status dppmb_config_profile(dppmb_config* c, const char* name) {
  if (auto s = require(c && name, "null argument")) return s;
  return guarded([&] { c->config.apply_profile(name); });
}

void dppmb_config_free(dppmb_config* c) { delete c; }

dppmb_status dppmb_run(const dppmb_config* c) {
  if (auto s = require(c != nullptr, "null argument")) return s;
  return guarded([&] { dppmb::harness::run_experiment(c->config); });
}

dppmb_status dppmb_metrics_compute(const char* memory_csv, const char* out_csv,
                                   double threshold_d, int32_t every,
                                   uint64_t seed, int32_t reseeds,
                                   const char* oracle_file) {
  if (auto s = require(memory_csv && out_csv, "null argument")) return s;
  return guarded([&] {
    const auto spec = (oracle_file && *oracle_file)
                          ? dppmb::oracle::read_spec_file(oracle_file)
                          : dppmb::oracle::OracleSpec::standard();
    dppmb::metrics::compute_metrics_file(memory_csv, out_csv, threshold_d, every,
                                         seed, reseeds, spec);
  });
}

dppmb_status dppmb_make_prior(const char* out_path, double smoothing,
                              const char* oracle_file) {
  if (auto s = require(out_path != nullptr, "null argument")) return s;
  return guarded([&] {
    const auto spec = (oracle_file && *oracle_file)
                          ? dppmb::oracle::read_spec_file(oracle_file)
                          : dppmb::oracle::OracleSpec::standard();
    const auto corpus = dppmb::agent::prior_corpus(spec);
    const auto prior =
        dppmb::agent::train_prior(corpus, spec.alphabet, 2, smoothing);
    dppmb::agent::write_policy_file(out_path, prior);
  });
}

}  // extern "C"
