#include "harness.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <thread>
#include <unordered_map>

#include "dpp.hpp"
#include "error.hpp"
#include "metrics.hpp"
#include "textio.hpp"

namespace dppmb::harness {

Variant variant_from_string(std::string_view name) {
  if (name == "standalone") return Variant::standalone;
  if (name == "dpp-t") return Variant::dpp_t;
  if (name == "dpp-a") return Variant::dpp_a;
  if (name == "dpp-p") return Variant::dpp_p;
  if (name == "dpp-d") return Variant::dpp_d;
  fail_arg("unknown variant: " + std::string(name));
}

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::standalone: return "standalone";
    case Variant::dpp_t: return "dpp-t";
    case Variant::dpp_a: return "dpp-a";
    case Variant::dpp_p: return "dpp-p";
    case Variant::dpp_d: return "dpp-d";
  }
  return "?";
}

BudgetMode budget_from_string(std::string_view name) {
  if (name == "strict") return BudgetMode::strict;
  if (name == "all-scored") return BudgetMode::all_scored;
  fail_arg("unknown budget mode: " + std::string(name));
}

std::string_view to_string(BudgetMode b) {
  return b == BudgetMode::strict ? "strict" : "all-scored";
}

void RunConfig::validate() const {
  if (batch_size < 1) fail_arg("B must be >= 1");
  if (steps < 1) fail_arg("G must be >= 1");
  if (mini_batch < 1) fail_arg("k must be >= 1");
  if (mini_batch > batch_size) fail_arg("k must not exceed B");
  if (admission_threshold < 0.0 || admission_threshold > 1.0)
    fail_arg("h must lie in [0, 1]");
  if (!(distance_threshold > 0.0 && distance_threshold <= 1.0))
    fail_arg("D must lie in (0, 1]");
  if (sigma < 0.0) fail_arg("sigma must be >= 0");
  if (!(alpha > 0.0)) fail_arg("alpha must be > 0");
  if (bucket_size < 1) fail_arg("bucket size M must be >= 1");
  if (horizon < 1) fail_arg("horizon T must be >= 1");
  if (metrics_every < 1) fail_arg("metrics_every must be >= 1");
  if (!(prior_smoothing > 0.0)) fail_arg("prior smoothing must be > 0");
  if (out_dir.empty()) fail_arg("out_dir must be set");
}

void RunConfig::set(const std::string& key, const std::string& value) {
  if (key == "B") {
    batch_size = textio::parse_int(value, key);
  } else if (key == "G") {
    steps = textio::parse_int(value, key);
  } else if (key == "k") {
    mini_batch = textio::parse_int(value, key);
  } else if (key == "h") {
    admission_threshold = textio::parse_double(value, key);
  } else if (key == "D") {
    distance_threshold = textio::parse_double(value, key);
  } else if (key == "sigma") {
    sigma = textio::parse_double(value, key);
  } else if (key == "alpha") {
    alpha = textio::parse_double(value, key);
  } else if (key == "bucket_m") {
    bucket_size = textio::parse_int(value, key);
  } else if (key == "horizon") {
    horizon = textio::parse_int(value, key);
  } else if (key == "variant") {
    variant = variant_from_string(value);
  } else if (key == "shaping") {
    shaping = shaping::mode_from_string(value);
  } else if (key == "budget_mode") {
    budget_mode = budget_from_string(value);
  } else if (key == "seed") {
    seed = textio::parse_uint(value, key);
  } else if (key == "out_dir") {
    out_dir = value;
  } else if (key == "metrics_every") {
    metrics_every = textio::parse_int(value, key);
  } else if (key == "prior_file") {
    prior_file = value;
  } else if (key == "oracle_file") {
    oracle_file = value;
  } else if (key == "prior_smoothing") {
    prior_smoothing = textio::parse_double(value, key);
  } else if (key == "profile") {
    apply_profile(value);
  } else {
    fail_arg("unknown config key: '" + key + "'");
  }
}

void RunConfig::load_file(const std::string& path) {
  for (const auto& [key, value] : textio::read_key_values(path)) set(key, value);
}

void RunConfig::apply_profile(const std::string& name) {
  if (name == "full") return;  // the defaults
  if (name == "desk") {
    batch_size = 160;
    mini_batch = 16;
    steps = 300;
    horizon = 48;
    // The full-scale step size barely moves a softmax table over 300 steps;
    // the desk bundle raises it so learning dynamics are visible.
    alpha = 0.06;
    return;
  }
  fail_arg("unknown profile: '" + name + "'");
}

std::string RunConfig::to_file_string() const {
  std::ostringstream ss;
  ss << "B = " << batch_size << "\n";
  ss << "G = " << steps << "\n";
  ss << "k = " << mini_batch << "\n";
  ss << "h = " << textio::format_double(admission_threshold) << "\n";
  ss << "D = " << textio::format_double(distance_threshold) << "\n";
  ss << "sigma = " << textio::format_double(sigma) << "\n";
  ss << "alpha = " << textio::format_double(alpha) << "\n";
  ss << "bucket_m = " << bucket_size << "\n";
  ss << "horizon = " << horizon << "\n";
  ss << "variant = " << to_string(variant) << "\n";
  ss << "shaping = " << shaping::to_string(shaping) << "\n";
  ss << "budget_mode = " << to_string(budget_mode) << "\n";
  ss << "seed = " << seed << "\n";
  ss << "out_dir = " << out_dir << "\n";
  ss << "metrics_every = " << metrics_every << "\n";
  ss << "prior_file = " << prior_file << "\n";
  ss << "oracle_file = " << oracle_file << "\n";
  ss << "prior_smoothing = " << textio::format_double(prior_smoothing) << "\n";
  return ss.str();
}

int configured_threads() {
  int threads = static_cast<int>(std::thread::hardware_concurrency());
  if (threads < 1) threads = 1;
  if (const char* env = std::getenv("DPPMB_THREADS")) {
    const int cap = std::atoi(env);
    if (cap >= 1) threads = std::min(threads, cap);
  }
  return threads;
}

std::vector<agent::Trajectory> rollout_batch(const agent::PolicyParams& policy,
                                             const chem::TokenAlphabet& a,
                                             int64_t count, int horizon,
                                             uint64_t seed, int64_t step,
                                             int threads) {
  std::vector<agent::Trajectory> out(static_cast<size_t>(count));
  auto roll_range = [&](int64_t begin, int64_t end) {
    for (int64_t b = begin; b < end; ++b) {
      Rng rng(seed, stream::id(stream::rollout, static_cast<uint64_t>(step),
                               static_cast<uint64_t>(b)));
      out[static_cast<size_t>(b)] = agent::rollout(policy, a, rng, horizon);
    }
  };

  const int workers = static_cast<int>(
      std::min<int64_t>(std::max(threads, 1), count));
  if (workers <= 1) {
    roll_range(0, count);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    const int64_t chunk = (count + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
      const int64_t begin = w * chunk;
      const int64_t end = std::min<int64_t>(begin + chunk, count);
      if (begin >= end) break;
      pool.emplace_back(roll_range, begin, end);
    }
    for (auto& t : pool) t.join();
  }
  return out;
}

namespace {

struct DistinctMolecule {
  chem::Molecule molecule;
  int64_t first_instance = 0;
  int64_t multiplicity = 0;
};

struct Selection {
  // Index pairs: which distinct molecule, backed by which rollout instance.
  std::vector<std::pair<int, int64_t>> picks;
};

// Uniform k-of-n without replacement, reported in ascending order.
std::vector<int64_t> sample_without_replacement(int64_t n, int64_t k, Rng& rng) {
  std::vector<int64_t> pool(static_cast<size_t>(n));
  for (int64_t i = 0; i < n; ++i) pool[static_cast<size_t>(i)] = i;
  for (int64_t i = 0; i < k; ++i) {
    const uint64_t j = i + rng.below(static_cast<uint64_t>(n - i));
    std::swap(pool[static_cast<size_t>(i)], pool[static_cast<size_t>(j)]);
  }
  pool.resize(static_cast<size_t>(k));
  std::sort(pool.begin(), pool.end());
  return pool;
}

}  // namespace

RunResult run_experiment(const RunConfig& cfg) {
  cfg.validate();

  const oracle::OracleSpec spec = cfg.oracle_file.empty()
                                      ? oracle::OracleSpec::standard()
                                      : oracle::read_spec_file(cfg.oracle_file);
  const chem::TokenAlphabet& alphabet = spec.alphabet;

  agent::PolicyParams prior;
  if (cfg.prior_file.empty()) {
    const auto corpus = agent::prior_corpus(spec);
    prior = agent::train_prior(corpus, alphabet, 2, cfg.prior_smoothing);
  } else {
    prior = agent::read_policy_file(cfg.prior_file);
    if (prior.alphabet_size != alphabet.size)
      fail_arg("prior file alphabet size " + std::to_string(prior.alphabet_size) +
               " does not match the oracle alphabet " +
               std::to_string(alphabet.size));
  }

  agent::PolicyParams policy = prior;
  agent::AdamState adam = agent::AdamState::like(policy, cfg.alpha);
  shaping::MemoryStore memory(cfg.admission_threshold);
  std::unique_ptr<shaping::RndState> rnd;
  if (cfg.shaping == shaping::Mode::tanhrnd)
    rnd = std::make_unique<shaping::RndState>(cfg.seed);

  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(cfg.out_dir, ec);
  if (ec) fail_io("cannot create output directory " + cfg.out_dir);
  const auto path_in = [&](const char* name) {
    return (fs::path(cfg.out_dir) / name).string();
  };

  textio::write_file(path_in("config.cfg"), cfg.to_file_string());
  oracle::write_spec_file(path_in("oracle.spec"), spec);

  std::ofstream steps_csv(path_in("steps.csv"));
  std::ofstream metrics_csv(path_in("metrics.csv"));
  if (!steps_csv || !metrics_csv) fail_io("cannot open CSV outputs in " + cfg.out_dir);
  steps_csv << "step,mean_reward_selected,max_reward_selected,oracle_calls_cum,"
               "actives_cum,scaffolds_cum,wall_ms\n";
  metrics_csv << metrics::metrics_csv_header() << '\n';

  const int threads = configured_threads();
  RunResult result;
  result.out_dir = cfg.out_dir;
  int64_t actives_cum = 0;
  std::unordered_map<std::string, int> active_scaffolds;

  const auto admit_scored = [&](const chem::Molecule& mol,
                                const oracle::ScoreBreakdown& scores, int64_t g) {
    if (memory.admit(mol, scores.reward, g, scores) && metrics::is_active(scores)) {
      ++actives_cum;
      active_scaffolds[mol.scaffold_key()] += 1;
    }
  };

  const auto run_step = [&](int64_t g) {
    const auto t0 = std::chrono::steady_clock::now();

    const auto rollouts = rollout_batch(policy, alphabet, cfg.batch_size,
                                        static_cast<int>(cfg.horizon), cfg.seed,
                                        g, threads);

    // Deduplicate by exact molecule token sequence (first occurrence wins).
    std::vector<DistinctMolecule> distinct;
    std::vector<int> instance_to_distinct(rollouts.size());
    {
      std::unordered_map<std::string, int> index_of;
      for (int64_t b = 0; b < cfg.batch_size; ++b) {
        auto tokens = rollouts[static_cast<size_t>(b)].molecule_tokens(alphabet);
        std::string key;
        for (size_t i = 0; i < tokens.size(); ++i) {
          if (i) key += '-';
          key += std::to_string(tokens[i]);
        }
        auto [it, inserted] = index_of.emplace(key, static_cast<int>(distinct.size()));
        if (inserted) {
          DistinctMolecule d;
          d.molecule = chem::Molecule::create(std::move(tokens), alphabet);
          d.first_instance = b;
          distinct.push_back(std::move(d));
        }
        distinct[static_cast<size_t>(it->second)].multiplicity += 1;
        instance_to_distinct[static_cast<size_t>(b)] = it->second;
      }
    }

    // All-scored budget: every generated instance is evaluated and offered
    // to the memory before selection; scaffold penalties are recorded as
    // the batch is processed.
    std::vector<double> instance_reward;
    std::vector<int> instance_penalty;
    if (cfg.budget_mode == BudgetMode::all_scored) {
      instance_reward.resize(rollouts.size());
      instance_penalty.assign(rollouts.size(), 1);
      for (int64_t b = 0; b < cfg.batch_size; ++b) {
        const int d = instance_to_distinct[static_cast<size_t>(b)];
        const auto& mol = distinct[static_cast<size_t>(d)].molecule;
        // One oracle call per generated instance, duplicates included.
        const oracle::ScoreBreakdown scores = oracle::extrinsic_reward(mol, spec);
        ++result.oracle_calls;
        instance_reward[static_cast<size_t>(b)] = scores.reward;
        admit_scored(mol, scores, g);
        if (cfg.shaping == shaping::Mode::ims)
          instance_penalty[static_cast<size_t>(b)] = shaping::ims_factor(
              memory, mol, static_cast<int>(cfg.bucket_size));
      }
    }

    // Selection.
    Rng sel_rng(cfg.seed, stream::id(stream::selection, static_cast<uint64_t>(g)));
    Selection sel;
    if (cfg.variant == Variant::standalone) {
      for (int64_t b :
           sample_without_replacement(cfg.batch_size, cfg.mini_batch, sel_rng))
        sel.picks.emplace_back(instance_to_distinct[static_cast<size_t>(b)], b);
    } else {
      const int n_distinct = static_cast<int>(distinct.size());
      if (n_distinct < cfg.mini_batch) {
        std::fprintf(stderr,
                     "dppmb: step %lld has %d distinct molecules for k = %lld; "
                     "filling from duplicates\n",
                     static_cast<long long>(g), n_distinct,
                     static_cast<long long>(cfg.mini_batch));
        std::vector<char> is_first(rollouts.size(), 0);
        for (const auto& d : distinct)
          is_first[static_cast<size_t>(d.first_instance)] = 1;
        for (const auto& d : distinct)
          sel.picks.emplace_back(
              instance_to_distinct[static_cast<size_t>(d.first_instance)],
              d.first_instance);
        std::vector<int64_t> leftovers;
        for (int64_t b = 0; b < cfg.batch_size; ++b)
          if (!is_first[static_cast<size_t>(b)]) leftovers.push_back(b);
        const int64_t need = cfg.mini_batch - n_distinct;
        for (int64_t pick : sample_without_replacement(
                 static_cast<int64_t>(leftovers.size()), need, sel_rng)) {
          const int64_t b = leftovers[static_cast<size_t>(pick)];
          sel.picks.emplace_back(instance_to_distinct[static_cast<size_t>(b)], b);
        }
        std::sort(sel.picks.begin(), sel.picks.end(),
                  [](const auto& x, const auto& y) { return x.second < y.second; });
      } else {
        std::vector<chem::Molecule> mols;
        mols.reserve(distinct.size());
        for (const auto& d : distinct) mols.push_back(d.molecule);

        const kernels::KernelMatrix lt = kernels::tanimoto_matrix(mols);
        const kernels::KernelMatrix ld = kernels::dice_matrix(mols);
        kernels::KernelVariant kv = kernels::KernelVariant::dpp_t;
        switch (cfg.variant) {
          case Variant::dpp_t: kv = kernels::KernelVariant::dpp_t; break;
          case Variant::dpp_a: kv = kernels::KernelVariant::dpp_a; break;
          case Variant::dpp_p: kv = kernels::KernelVariant::dpp_p; break;
          case Variant::dpp_d: kv = kernels::KernelVariant::dpp_d; break;
          case Variant::standalone: break;
        }
        const kernels::KernelMatrix l = kernels::combine(kv, lt, ld);
        const dpp::KdppSampler sampler(l, static_cast<int>(cfg.mini_batch));
        for (int d : sampler.sample(sel_rng))
          sel.picks.emplace_back(d, distinct[static_cast<size_t>(d)].first_instance);
      }
    }

    // Evaluation, admission and shaping for the learning mini-batch.
    std::vector<agent::ScoredTrajectory> batch;
    batch.reserve(sel.picks.size());
    std::vector<double> extrinsic;
    extrinsic.reserve(sel.picks.size());
    std::vector<const chem::Molecule*> selected_molecules;
    selected_molecules.reserve(sel.picks.size());

    for (const auto& [d, b] : sel.picks) {
      const auto& mol = distinct[static_cast<size_t>(d)].molecule;
      selected_molecules.push_back(&mol);
      double reward;
      int penalty = 1;
      if (cfg.budget_mode == BudgetMode::strict) {
        const oracle::ScoreBreakdown scores = oracle::extrinsic_reward(mol, spec);
        ++result.oracle_calls;
        admit_scored(mol, scores, g);
        reward = scores.reward;
        if (cfg.shaping == shaping::Mode::ims)
          penalty =
              shaping::ims_factor(memory, mol, static_cast<int>(cfg.bucket_size));
      } else {
        reward = instance_reward[static_cast<size_t>(b)];
        penalty = instance_penalty[static_cast<size_t>(b)];
      }
      extrinsic.push_back(reward);

      double reshaped = reward;
      if (cfg.shaping == shaping::Mode::ims) {
        reshaped = penalty * reward;
      } else if (cfg.shaping == shaping::Mode::tanhrnd) {
        reshaped = reward * (0.5 + 0.5 * rnd->novelty(mol));
      }
      batch.push_back(agent::ScoredTrajectory{
          &rollouts[static_cast<size_t>(b)], reshaped});
    }

    if (rnd) rnd->update(selected_molecules);

    const auto lg = agent::reinvent_loss_and_grad(policy, prior, alphabet, batch,
                                                  cfg.sigma);
    agent::adam_step(adam, policy, lg.grad);

    double mean_reward = 0.0, max_reward = 0.0;
    for (double r : extrinsic) {
      mean_reward += r;
      max_reward = std::max(max_reward, r);
    }
    mean_reward /= static_cast<double>(extrinsic.size());

    const auto wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                             std::chrono::steady_clock::now() - t0)
                             .count();
    steps_csv << g << ',' << textio::format_double(mean_reward) << ','
              << textio::format_double(max_reward) << ',' << result.oracle_calls
              << ',' << actives_cum << ',' << active_scaffolds.size() << ','
              << wall_ms << '\n';

    if (g % cfg.metrics_every == 0 || g == cfg.steps) {
      const auto row =
          metrics::report_at(memory.entries(), g, cfg.distance_threshold,
                             cfg.seed, 1);
      metrics_csv << metrics::metrics_csv_row(row) << '\n';
      if (g == cfg.steps) {
        result.final_diverse_actives = row.diverse_actives;
        result.final_actives = row.n_actives;
        result.final_scaffolds = row.n_scaffolds;
      }
    }
    if (g == cfg.steps) result.final_mean_reward = mean_reward;
  };

  for (int64_t g = 1; g <= cfg.steps; ++g) {
    try {
      run_step(g);
    } catch (const Error& e) {
      fail(e.kind(), "step " + std::to_string(g) + ": " + e.what());
    }
  }

  steps_csv.close();
  metrics_csv.close();
  if (!steps_csv || !metrics_csv) fail_io("failed writing CSV outputs");

  memory.write_csv(path_in("memory.csv"));
  agent::write_policy_file(path_in("policy.bin"), policy);
  result.memory_size = static_cast<int64_t>(memory.entries().size());
  return result;
}

}  // namespace dppmb::harness
