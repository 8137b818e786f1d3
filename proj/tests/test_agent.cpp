#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "agent.hpp"
#include "error.hpp"
#include "testutil.hpp"

using namespace dppmb;
using agent::PolicyParams;
using agent::Trajectory;

namespace {

const chem::TokenAlphabet& alphabet() {
  static const auto a = chem::TokenAlphabet::standard();
  return a;
}

PolicyParams random_policy(Rng& r, int alphabet_size, int context_len,
                           double scale = 1.0) {
  auto p = PolicyParams::zeros(alphabet_size, context_len);
  for (auto& l : p.logits) l = scale * (2.0 * r.uniform() - 1.0);
  return p;
}

chem::TokenAlphabet small_alphabet(int size) {
  chem::TokenAlphabet a;
  a.size = size;
  a.start_id = 0;
  a.stop_id = 1;
  a.backbone.assign(size, 0);
  a.donor.assign(size, 0);
  a.weight.assign(size, 10.0);
  for (int i = 2; i < size; ++i) a.backbone[i] = i % 2;
  a.validate();
  return a;
}

}  // namespace

TEST_CASE("context window rolls over the last two tokens") {
  const auto p = PolicyParams::zeros(34, 2);
  agent::ContextWindow ctx(p, 0);
  CHECK(ctx.index == 0);  // (start, start)
  ctx.push(5);
  CHECK(ctx.index == 5);  // (start, 5)
  ctx.push(7);
  CHECK(ctx.index == 5 * 34 + 7);
  ctx.push(2);
  CHECK(ctx.index == 7 * 34 + 2);
}

TEST_CASE("rollout stops on the stop token") {
  auto p = PolicyParams::zeros(34, 2);
  for (int c = 0; c < p.rows(); ++c) p.row(c)[alphabet().stop_id] = 1e9;
  Rng rng(1, 1);
  const auto t = agent::rollout(p, alphabet(), rng, 64);
  CHECK(t.stopped);
  CHECK(t.tokens == std::vector<int>{0, 1});
  CHECK(t.molecule_tokens(alphabet()).empty());
  CHECK(t.logps.size() == 1);
  CHECK(t.logps[0] == doctest::Approx(0.0));
}

TEST_CASE("rollout horizon bound and determinism") {
  const auto p = PolicyParams::zeros(34, 2);  // uniform policy
  for (uint64_t s = 0; s < 20; ++s) {
    Rng rng(7, s);
    const auto t = agent::rollout(p, alphabet(), rng, 5);
    CHECK(t.tokens.size() <= 6);
    CHECK(t.tokens.front() == alphabet().start_id);
    CHECK(t.logps.size() == t.tokens.size() - 1);
  }
  Rng a(9, 3), b(9, 3);
  const auto t1 = agent::rollout(p, alphabet(), a, 32);
  const auto t2 = agent::rollout(p, alphabet(), b, 32);
  CHECK(t1.tokens == t2.tokens);
}

TEST_CASE("log_prob of a uniform policy") {
  const auto p = PolicyParams::zeros(34, 2);
  Trajectory t;
  t.tokens = {0, 5, 9, 1};  // three actions: 5, 9, stop
  t.stopped = true;
  CHECK(agent::log_prob(p, alphabet(), t) ==
        doctest::Approx(3.0 * std::log(1.0 / 34.0)).epsilon(1e-12));
}

TEST_CASE("log_prob of a deterministic policy on its own rollout is zero") {
  auto p = PolicyParams::zeros(34, 2);
  for (int c = 0; c < p.rows(); ++c) p.row(c)[2] = 1e9;  // always emit token 2
  Rng rng(3, 3);
  const auto t = agent::rollout(p, alphabet(), rng, 8);
  CHECK_FALSE(t.stopped);  // horizon-capped
  CHECK(agent::log_prob(p, alphabet(), t) == doctest::Approx(0.0));
}

TEST_CASE("log_prob decreases as actions are appended") {
  auto r = testutil::rng(5);
  const auto p = random_policy(r, 34, 2);
  Trajectory t;
  t.tokens = {0, 4};
  double prev = agent::log_prob(p, alphabet(), t);
  for (int more : {7, 12, 1}) {
    t.tokens.push_back(more);
    const double lp = agent::log_prob(p, alphabet(), t);
    CHECK(lp <= prev);
    prev = lp;
  }
}

TEST_CASE("rollout log-probabilities agree with log_prob") {
  auto r = testutil::rng(8);
  const auto p = random_policy(r, 34, 2);
  Rng rng(21, 0);
  const auto t = agent::rollout(p, alphabet(), rng, 40);
  double sum = 0.0;
  for (double lp : t.logps) sum += lp;
  CHECK(sum == doctest::Approx(agent::log_prob(p, alphabet(), t)).epsilon(1e-9));
}

TEST_CASE("augmented log-likelihood adds sigma times reward") {
  auto r = testutil::rng(13);
  const auto prior = random_policy(r, 34, 2);
  Rng rng(5, 5);
  const auto t = agent::rollout(prior, alphabet(), rng, 20);
  const double lp = agent::log_prob(prior, alphabet(), t);
  CHECK(agent::augmented_log_likelihood(prior, alphabet(), 0.0, 0.7, t) ==
        doctest::Approx(lp));
  CHECK(agent::augmented_log_likelihood(prior, alphabet(), 128.0, 0.0, t) ==
        doctest::Approx(lp));
  CHECK(agent::augmented_log_likelihood(prior, alphabet(), 128.0, 1.0, t) ==
        doctest::Approx(lp + 128.0));
}

TEST_CASE("loss vanishes at the prior with zero sigma") {
  auto r = testutil::rng(17);
  const auto prior = random_policy(r, 8, 2);
  const auto a = small_alphabet(8);
  Rng rng(2, 2);
  std::vector<Trajectory> trajs;
  for (int i = 0; i < 4; ++i) trajs.push_back(agent::rollout(prior, a, rng, 12));
  std::vector<agent::ScoredTrajectory> batch;
  for (const auto& t : trajs) batch.push_back({&t, 0.9});

  const auto lg = agent::reinvent_loss_and_grad(prior, prior, a, batch, 0.0);
  CHECK(lg.loss == doctest::Approx(0.0));
  for (double g : lg.grad) CHECK(g == 0.0);
}

TEST_CASE("loss equals sigma squared for one max-reward trajectory at the prior") {
  auto r = testutil::rng(19);
  const auto prior = random_policy(r, 8, 2);
  const auto a = small_alphabet(8);
  Rng rng(6, 1);
  const auto t = agent::rollout(prior, a, rng, 10);
  const agent::ScoredTrajectory item{&t, 1.0};
  const auto lg =
      agent::reinvent_loss_and_grad(prior, prior, a, {&item, 1}, 128.0);
  CHECK(lg.loss == doctest::Approx(128.0 * 128.0));
}

TEST_CASE("analytic gradient matches central finite differences") {
  const auto a = small_alphabet(6);
  for (uint64_t trial = 0; trial < 3; ++trial) {
    auto r = testutil::rng(100 + trial);
    auto policy = random_policy(r, 6, 2);
    const auto prior = random_policy(r, 6, 2);

    Rng rng(50 + trial, 1);
    std::vector<Trajectory> trajs;
    for (int i = 0; i < 3; ++i) trajs.push_back(agent::rollout(policy, a, rng, 8));
    std::vector<agent::ScoredTrajectory> batch;
    for (const auto& t : trajs) batch.push_back({&t, r.uniform()});
    const double sigma = 2.0;

    const auto lg = agent::reinvent_loss_and_grad(policy, prior, a, batch, sigma);

    const double h = 1e-5;
    double max_rel = 0.0;
    for (size_t i = 0; i < policy.param_count(); ++i) {
      const double saved = policy.logits[i];
      policy.logits[i] = saved + h;
      const double up =
          agent::reinvent_loss_and_grad(policy, prior, a, batch, sigma).loss;
      policy.logits[i] = saved - h;
      const double down =
          agent::reinvent_loss_and_grad(policy, prior, a, batch, sigma).loss;
      policy.logits[i] = saved;
      const double fd = (up - down) / (2.0 * h);
      const double rel = std::abs(lg.grad[i] - fd) /
                         std::max({1e-6, std::abs(lg.grad[i]), std::abs(fd)});
      max_rel = std::max(max_rel, rel);
    }
    CHECK(max_rel <= 1e-4);
  }
}

TEST_CASE("loss is invariant to shifting a context row") {
  const auto a = small_alphabet(6);
  auto r = testutil::rng(23);
  auto policy = random_policy(r, 6, 2);
  const auto prior = random_policy(r, 6, 2);
  Rng rng(77, 0);
  std::vector<Trajectory> trajs;
  for (int i = 0; i < 3; ++i) trajs.push_back(agent::rollout(policy, a, rng, 8));
  std::vector<agent::ScoredTrajectory> batch;
  for (const auto& t : trajs) batch.push_back({&t, 0.4});

  const double before =
      agent::reinvent_loss_and_grad(policy, prior, a, batch, 3.0).loss;
  for (auto& l : policy.row(0)) l += 3.7;  // the (start, start) row
  const double after =
      agent::reinvent_loss_and_grad(policy, prior, a, batch, 3.0).loss;
  CHECK(after == doctest::Approx(before).epsilon(1e-9));
}

TEST_CASE("softmax rows are normalized") {
  auto r = testutil::rng(29);
  const auto policy = random_policy(r, 10, 2, 4.0);
  const auto a = small_alphabet(10);
  // visit rows via log_prob over all single-action trajectories
  for (int ctx_token = 2; ctx_token < 10; ++ctx_token) {
    double total = 0.0;
    for (int action = 0; action < 10; ++action) {
      Trajectory t;
      t.tokens = {0, ctx_token, action};
      Trajectory head;
      head.tokens = {0, ctx_token};
      total += std::exp(agent::log_prob(policy, a, t) -
                        agent::log_prob(policy, a, head));
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("adam step") {
  auto p = PolicyParams::zeros(4, 1);
  auto st = agent::AdamState::like(p, 0.1);

  std::vector<double> zero(p.param_count(), 0.0);
  agent::adam_step(st, p, zero);
  CHECK(st.step == 1);
  for (double l : p.logits) CHECK(l == 0.0);

  // constant gradient drives the per-step update toward alpha
  auto q = PolicyParams::zeros(4, 1);
  auto st2 = agent::AdamState::like(q, 0.1);
  std::vector<double> grad(q.param_count(), 0.37);
  double prev = q.logits[0];
  for (int i = 0; i < 2000; ++i) agent::adam_step(st2, q, grad);
  prev = q.logits[0];
  agent::adam_step(st2, q, grad);
  CHECK(std::abs(q.logits[0] - prev) == doctest::Approx(0.1).epsilon(0.01));

  // determinism
  auto p1 = PolicyParams::zeros(4, 1);
  auto p2 = PolicyParams::zeros(4, 1);
  auto s1 = agent::AdamState::like(p1, 0.05);
  auto s2 = agent::AdamState::like(p2, 0.05);
  std::vector<double> g(p1.param_count(), -0.2);
  agent::adam_step(s1, p1, g);
  agent::adam_step(s2, p2, g);
  CHECK(p1.logits == p2.logits);

  std::vector<double> wrong(3, 0.0);
  CHECK_THROWS_AS(agent::adam_step(st, p, wrong), Error);
}

TEST_CASE("train_prior puts the corpus on top") {
  const auto a = small_alphabet(8);
  const std::vector<std::vector<int>> corpus{{2, 3, 4, 5, 2, 3}};
  const auto prior = agent::train_prior(corpus, a, 2, 0.01);

  Trajectory corpus_traj;
  corpus_traj.tokens = {0, 2, 3, 4, 5, 2, 3, 1};
  const double corpus_lp = agent::log_prob(prior, a, corpus_traj);

  auto r = testutil::rng(31);
  for (int i = 0; i < 20; ++i) {
    Trajectory other;
    other.tokens = {0};
    for (int j = 0; j < 6; ++j)
      other.tokens.push_back(2 + static_cast<int>(r.below(6)));
    other.tokens.push_back(1);
    if (other.tokens == corpus_traj.tokens) continue;
    CHECK(agent::log_prob(prior, a, other) < corpus_lp);
  }
}

TEST_CASE("huge smoothing approaches the uniform policy") {
  const auto a = small_alphabet(8);
  const std::vector<std::vector<int>> corpus{{2, 3}, {4, 5}};
  const auto prior = agent::train_prior(corpus, a, 2, 1e9);
  Trajectory t;
  t.tokens = {0, 2, 3};
  CHECK(agent::log_prob(prior, a, t) ==
        doctest::Approx(2.0 * std::log(1.0 / 8.0)).epsilon(1e-6));
}

TEST_CASE("train_prior is deterministic and validates input") {
  const auto a = small_alphabet(8);
  const std::vector<std::vector<int>> corpus{{2, 3, 4}, {5, 6, 7}};
  const auto p1 = agent::train_prior(corpus, a, 2, 0.01);
  const auto p2 = agent::train_prior(corpus, a, 2, 0.01);
  CHECK(p1.logits == p2.logits);

  CHECK_THROWS_AS(agent::train_prior({}, a, 2, 0.01), Error);
  CHECK_THROWS_AS(agent::train_prior(corpus, a, 2, 0.0), Error);
}

TEST_CASE("prior corpus composition") {
  const auto spec = oracle::OracleSpec::standard();
  const auto corpus = agent::prior_corpus(spec);
  REQUIRE(corpus.size() == 2000);
  for (size_t i = 0; i < corpus.size(); ++i) {
    if (i % 2 == 0) {
      CHECK(corpus[i].size() == 30);  // motif mutants
    } else {
      CHECK(corpus[i].size() >= 20);
      CHECK(corpus[i].size() <= 60);
    }
    for (int t : corpus[i]) CHECK_FALSE(spec.alphabet.is_terminal(t));
  }
  CHECK(agent::prior_corpus(spec) == corpus);  // deterministic
}

TEST_CASE("policy file round trip") {
  auto r = testutil::rng(41);
  const auto p = random_policy(r, 12, 2);
  const auto path =
      (std::filesystem::temp_directory_path() / "dppmb_test_policy.bin").string();
  agent::write_policy_file(path, p);
  const auto back = agent::read_policy_file(path);
  CHECK(back.alphabet_size == 12);
  CHECK(back.context_len == 2);
  CHECK(back.logits == p.logits);

  // truncated file
  {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << "DPPMBPR1####";
  }
  CHECK_THROWS_AS(agent::read_policy_file(path), Error);
  {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << "NOTMAGIC0000000000000000";
  }
  CHECK_THROWS_AS(agent::read_policy_file(path), Error);
  std::filesystem::remove(path);
}
