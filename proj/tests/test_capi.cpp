#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "dppmb.h"

namespace {

namespace fs = std::filesystem;

std::string temp_path(const char* name) {
  return (fs::temp_directory_path() / name).string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

}  // namespace

TEST_CASE("version and error state") {
  CHECK(std::strlen(dppmb_version()) > 0);
  CHECK(std::string(dppmb_last_error()).empty());
}

TEST_CASE("dense kernels and samplers") {
  const std::vector<double> diag{1, 0, 0, 0, 0, 2, 0, 0, 0, 0, 3, 0, 0, 0, 0, 4};
  dppmb_kernel* kernel = nullptr;
  REQUIRE(dppmb_kernel_from_dense(4, diag.data(), &kernel) == DPPMB_OK);
  CHECK(dppmb_kernel_dim(kernel) == 4);

  dppmb_sampler* sampler = nullptr;
  REQUIRE(dppmb_sampler_new(kernel, 2, &sampler) == DPPMB_OK);
  CHECK(dppmb_sampler_k(sampler) == 2);

  int32_t a[2] = {-1, -1}, b[2] = {-1, -1};
  REQUIRE(dppmb_sampler_draw(sampler, 7, 0, a) == DPPMB_OK);
  REQUIRE(dppmb_sampler_draw(sampler, 7, 0, b) == DPPMB_OK);
  CHECK(a[0] == b[0]);  // identical seed and stream
  CHECK(a[1] == b[1]);
  CHECK(a[0] >= 0);
  CHECK(a[0] < a[1]);  // ascending distinct indices
  CHECK(a[1] <= 3);

  // the two largest eigenvalues dominate
  int high = 0;
  for (uint64_t stream = 0; stream < 200; ++stream) {
    int32_t out[2];
    REQUIRE(dppmb_sampler_draw(sampler, 7, stream, out) == DPPMB_OK);
    if (out[0] == 2 && out[1] == 3) ++high;
  }
  CHECK(high > 30);

  dppmb_sampler_free(sampler);
  dppmb_kernel_free(kernel);
}

TEST_CASE("invalid arguments set a status and message") {
  CHECK(dppmb_kernel_from_dense(2, nullptr, nullptr) == DPPMB_EINVAL);

  const std::vector<double> asym{1, 2, 3, 4};
  dppmb_kernel* kernel = nullptr;
  CHECK(dppmb_kernel_from_dense(2, asym.data(), &kernel) == DPPMB_EINVAL);
  CHECK(std::string(dppmb_last_error()).find("symmetric") != std::string::npos);

  const std::vector<double> ident{1, 0, 0, 1};
  REQUIRE(dppmb_kernel_from_dense(2, ident.data(), &kernel) == DPPMB_OK);
  dppmb_sampler* sampler = nullptr;
  CHECK(dppmb_sampler_new(kernel, 5, &sampler) == DPPMB_EINVAL);
  CHECK(std::string(dppmb_last_error()).find("exceeds") != std::string::npos);

  // not positive semidefinite
  const std::vector<double> indef{1, 0, 0, -1};
  dppmb_kernel* bad = nullptr;
  REQUIRE(dppmb_kernel_from_dense(2, indef.data(), &bad) == DPPMB_OK);
  CHECK(dppmb_sampler_new(bad, 1, &sampler) == DPPMB_ENUMERIC);
  dppmb_kernel_free(bad);
  dppmb_kernel_free(kernel);
}

TEST_CASE("kernel files") {
  const auto path = temp_path("dppmb_capi_kernel.txt");
  {
    std::ofstream out(path);
    out << "2\n1 0.25\n0.25 1\n";
  }
  dppmb_kernel* kernel = nullptr;
  REQUIRE(dppmb_kernel_read(path.c_str(), &kernel) == DPPMB_OK);
  CHECK(dppmb_kernel_dim(kernel) == 2);
  dppmb_kernel_free(kernel);
  fs::remove(path);

  CHECK(dppmb_kernel_read("/nonexistent/kernel.txt", &kernel) == DPPMB_EIO);
  {
    std::ofstream out(path);
    out << "3\n1 0\n";
  }
  CHECK(dppmb_kernel_read(path.c_str(), &kernel) == DPPMB_EPARSE);
  fs::remove(path);
}

TEST_CASE("fingerprint-file kernels") {
  const auto path = temp_path("dppmb_capi_fps.txt");
  {
    std::ofstream out(path);
    out << "a 1 2 3\nb 2 3 4\nc 100\n";
  }
  dppmb_kernel* kernel = nullptr;
  REQUIRE(dppmb_kernel_from_fingerprints(path.c_str(), &kernel) == DPPMB_OK);
  CHECK(dppmb_kernel_dim(kernel) == 3);
  dppmb_sampler* sampler = nullptr;
  REQUIRE(dppmb_sampler_new(kernel, 2, &sampler) == DPPMB_OK);
  int32_t out[2];
  CHECK(dppmb_sampler_draw(sampler, 1, 0, out) == DPPMB_OK);
  dppmb_sampler_free(sampler);
  dppmb_kernel_free(kernel);
  fs::remove(path);
}

TEST_CASE("config lifecycle and a tiny run") {
  dppmb_config* cfg = nullptr;
  REQUIRE(dppmb_config_new(&cfg) == DPPMB_OK);

  CHECK(dppmb_config_set(cfg, "nonsense", "1") == DPPMB_EINVAL);
  CHECK(dppmb_config_profile(cfg, "bogus") == DPPMB_EINVAL);
  REQUIRE(dppmb_config_profile(cfg, "desk") == DPPMB_OK);

  const std::string out_dir = temp_path("dppmb_capi_run");
  fs::remove_all(out_dir);
  const std::pair<const char*, std::string> settings[] = {
      {"B", "12"},      {"k", "3"},    {"G", "2"},
      {"horizon", "16"}, {"seed", "5"}, {"out_dir", out_dir}};
  for (const auto& [key, value] : settings)
    REQUIRE(dppmb_config_set(cfg, key, value.c_str()) == DPPMB_OK);

  REQUIRE(dppmb_run(cfg) == DPPMB_OK);
  for (const char* name : {"config.cfg", "steps.csv", "metrics.csv", "memory.csv",
                           "oracle.spec", "policy.bin"})
    CHECK(fs::exists(fs::path(out_dir) / name));

  // config files written by a run load back
  dppmb_config* reload = nullptr;
  REQUIRE(dppmb_config_new(&reload) == DPPMB_OK);
  const auto cfg_path = (fs::path(out_dir) / "config.cfg").string();
  CHECK(dppmb_config_load(reload, cfg_path.c_str()) == DPPMB_OK);
  CHECK(dppmb_config_load(reload, "/nonexistent.cfg") == DPPMB_EIO);
  dppmb_config_free(reload);

  // offline metrics over the run's memory
  const auto metrics_out = temp_path("dppmb_capi_metrics.csv");
  const auto memory_csv = (fs::path(out_dir) / "memory.csv").string();
  REQUIRE(dppmb_metrics_compute(memory_csv.c_str(), metrics_out.c_str(), 0.7, 1,
                                5, 1, nullptr) == DPPMB_OK);
  CHECK(slurp(metrics_out).starts_with(
      "step,n_actives,n_scaffolds,diverse_actives,picker_seed"));
  fs::remove(metrics_out);

  dppmb_config_free(cfg);
  fs::remove_all(out_dir);
}

TEST_CASE("make prior writes a policy file") {
  const auto path = temp_path("dppmb_capi_prior.bin");
  REQUIRE(dppmb_make_prior(path.c_str(), 0.01, nullptr) == DPPMB_OK);
  const std::string data = slurp(path);
  REQUIRE(data.size() > 16);
  CHECK(data.substr(0, 8) == "DPPMBPR1");
  fs::remove(path);

  CHECK(dppmb_make_prior("/nonexistent/dir/prior.bin", 0.01, nullptr) == DPPMB_EIO);
  CHECK(dppmb_make_prior(path.c_str(), -1.0, nullptr) == DPPMB_EINVAL);
  fs::remove(path);
}
