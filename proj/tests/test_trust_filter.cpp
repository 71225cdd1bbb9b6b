#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "btm/errors.hpp"
#include "btm/grid_filter.hpp"
#include "btm/trust_filter.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace btm;

namespace {

ModelParams degenerate_identity() {
  ModelParams p;
  p.forgetting = 1.0;
  p.process_variance = 1e-12;
  return p;
}

CommunityObservation community(std::optional<double> center, std::vector<double> readings) {
  CommunityObservation obs;
  obs.center_reading = center;
  obs.member_trusts.assign(readings.size(), 1.0);
  obs.member_readings = std::move(readings);
  return obs;
}

void check_invariants(const ParticleSet& s) {
  const auto w = s.weights();
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
  for (double x : w) CHECK(x > 0.0);
  for (double x : s.particles()) {
    CHECK(x >= 0.0);
    CHECK(x <= 1.0);
  }
}

}  // namespace

TEST_CASE("model params validation") {
  CHECK_NOTHROW(ModelParams::reference().validate());
  const auto t1 = ModelParams::reference();
  CHECK(t1.particle_count == 20);
  CHECK(t1.forgetting == 0.85);
  CHECK(t1.process_variance == 0.01);
  CHECK(t1.likelihood_sharpness == 0.1);
  CHECK(t1.vote_radius == 5.0);
  CHECK(t1.trust_threshold == 0.3);

  auto bad = t1;
  bad.likelihood_sharpness = 1.0;
  CHECK_THROWS_AS(bad.validate(), InvalidConfig);
  bad = t1;
  bad.forgetting = 1.1;
  CHECK_THROWS_AS(bad.validate(), InvalidConfig);
  bad = t1;
  bad.process_variance = 0.0;
  CHECK_THROWS_AS(bad.validate(), InvalidConfig);
  bad = t1;
  bad.particle_count = 0;
  CHECK_THROWS_AS(bad.validate(), InvalidConfig);
  bad = t1;
  bad.trust_threshold = 0.0;
  CHECK_THROWS_AS(bad.validate(), InvalidConfig);
}

TEST_CASE("particle set rejects broken invariants") {
  CHECK_THROWS_AS(ParticleSet({0.5, 1.2}, {0.5, 0.5}), InvalidConfig);
  CHECK_THROWS_AS(ParticleSet({0.5, 0.2}, {0.0, 1.0}), InvalidConfig);
  CHECK_THROWS_AS(ParticleSet({0.5, 0.2}, {0.4, 0.4}), InvalidConfig);
  CHECK_THROWS_AS(ParticleSet({0.5}, {0.5, 0.5}), InvalidConfig);
  const ParticleSet s({0.2, 0.6}, {0.25, 0.75});
  CHECK(s.mean() == doctest::Approx(0.5));
  CHECK(s.effective_sample_size() == doctest::Approx(1.0 / (0.0625 + 0.5625)));
}

TEST_CASE("propagate_particle") {
  SUBCASE("identity transition in degenerate mode") {
    Rng rng(7);
    for (int i = 0; i < 100; ++i) {
      CHECK(propagate_particle(1.0, degenerate_identity(), rng) == doctest::Approx(1.0).epsilon(1e-5));
    }
  }
  SUBCASE("lower truncation bound") {
    Rng rng(8);
    for (double alpha : {0.0, 0.5, 1.0}) {
      for (double q : {1e-6, 0.01, 0.5}) {
        ModelParams p;
        p.forgetting = alpha;
        p.process_variance = q;
        for (int i = 0; i < 200; ++i) CHECK(propagate_particle(0.0, p, rng) >= 0.0);
      }
    }
  }
  SUBCASE("empirical mean matches the truncated-Gaussian oracle") {
    const auto p = ModelParams::reference();
    constexpr int kDraws = 100'000;
    Rng rng(11);
    testing::RejectionOracle oracle(12);
    double impl = 0.0;
    double ref = 0.0;
    for (int i = 0; i < kDraws; ++i) {
      impl += propagate_particle(1.0, p, rng);
      ref += oracle.draw(1.0, 0.85, 0.01);
    }
    impl /= kDraws;
    ref /= kDraws;
    const double closed_form = testing::truncated_normal_mean(0.85, 0.1, 0.0, 1.0);
    CHECK(closed_form == doctest::Approx(0.836121).epsilon(1e-6));
    // Standard error of each mean is about 3e-4.
    CHECK(std::abs(impl - ref) < 2e-3);
    CHECK(std::abs(impl - closed_form) < 1.5e-3);
  }
  SUBCASE("pathological variance aborts") {
    ModelParams p;
    p.forgetting = 1.0;
    p.process_variance = 1e-300;
    Rng rng(3);
    // Center at 1.5 with vanishing noise can never land in [0,1].
    CHECK_THROWS_AS(propagate_particle(1.5, p, rng), SamplingExhausted);
  }
}

TEST_CASE("vote uses a strict radius") {
  const auto p = ModelParams::reference();
  CHECK(vote(22, 25, p) == 1);
  CHECK(vote(30, 25, p) == 0);
  CHECK(vote(20, 25, p) == 0);
  CHECK(vote(25, 25, p) == 1);
}

TEST_CASE("voting_average") {
  const auto p = ModelParams::reference();
  CHECK(voting_average(community(25.0, {22, 24, 40, 26}), p) == 0.75);
  CHECK(voting_average(community(25.0, {25, 24, 26}), p) == 1.0);
  CHECK(voting_average(community(25.0, {0, 40, 60}), p) == 0.0);
  CHECK_THROWS_AS(voting_average(community(25.0, {}), p), EmptyCommunity);
  CHECK_THROWS_AS(voting_average(community(std::nullopt, {20}), p), MissingCenterReading);
}

TEST_CASE("likelihood") {
  const auto p = ModelParams::reference();
  CHECK(likelihood(0.4, 0.4, p) == 1.0);
  CHECK(likelihood(0.3, 0.8, p) == doctest::Approx(6.737946999085467e-3).epsilon(1e-12));
  CHECK(likelihood(0.0, 1.0, p) == doctest::Approx(4.5399929762484854e-5).epsilon(1e-12));

  // Monotone in the distance to V, on a hand-rolled random sample.
  Rng rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_real_distribution<double> b(0.01, 0.99);
  for (int i = 0; i < 2000; ++i) {
    ModelParams q = p;
    q.likelihood_sharpness = b(rng);
    const double v = u(rng), l1 = u(rng), l2 = u(rng);
    const bool closer = std::abs(l1 - v) <= std::abs(l2 - v);
    CHECK((likelihood(l1, v, q) >= likelihood(l2, v, q)) == closer);
  }
}

TEST_CASE("systematic resampling follows the weights") {
  Rng rng(1);
  const std::vector<double> w{0.0, 0.5, 0.25, 0.25};
  const auto idx = systematic_resample_indices(w, rng);
  REQUIRE(idx.size() == 4);
  CHECK(std::count(idx.begin(), idx.end(), 0u) == 0);
  CHECK(std::count(idx.begin(), idx.end(), 1u) == 2);
  CHECK(std::count(idx.begin(), idx.end(), 2u) == 1);
  CHECK(std::count(idx.begin(), idx.end(), 3u) == 1);
}

TEST_CASE("filter_step examples") {
  SUBCASE("identical particles ignore the observation") {
    const auto p = degenerate_identity();
    Rng rng(2);
    for (double v : {0.0, 0.5, 1.0}) {
      const auto out = filter_step(ParticleSet::full_trust(20), std::optional<double>(v), p, rng);
      CHECK(out.estimate.value() == doctest::Approx(1.0).epsilon(1e-4));
    }
  }

  SUBCASE("unanimous trust keeps the estimate high") {
    const auto p = ModelParams::reference();
    const GridFilter grid(p, 2000);
    std::vector<double> ref;
    auto density = GridDensity::point_mass(2000, 1.0);
    for (int k = 0; k < 3; ++k) {
      density = grid.step(density, 1.0);
      ref.push_back(density.mean());
      CHECK(ref.back() > 0.8);
    }
    // Frozen oracle values.
    CHECK(ref[0] == doctest::Approx(0.8992).epsilon(5e-4));
    CHECK(ref[1] == doctest::Approx(0.8608).epsilon(5e-4));
    CHECK(ref[2] == doctest::Approx(0.8473).epsilon(5e-4));

    std::vector<double> mean(3, 0.0);
    for (int seed = 0; seed < 100; ++seed) {
      Rng rng(static_cast<std::uint64_t>(seed));
      auto state = ParticleSet::full_trust(p.particle_count);
      for (int k = 0; k < 3; ++k) {
        auto out = filter_step(state, std::optional<double>(1.0), p, rng);
        mean[static_cast<std::size_t>(k)] += out.estimate.value() / 100.0;
        state = std::move(out.particles);
      }
    }
    for (int k = 0; k < 3; ++k) {
      CHECK(mean[static_cast<std::size_t>(k)] > 0.8);
      CHECK(std::abs(mean[static_cast<std::size_t>(k)] - ref[static_cast<std::size_t>(k)]) < 0.05);
    }
  }

  SUBCASE("a unanimous distrust vote pulls the estimate down") {
    // From full trust a single V=0 step cannot reach 0.3 under the reference
    // parameters: the transition prior puts almost no mass there. The oracle
    // crosses the threshold on the third consecutive V=0 step.
    const auto p = ModelParams::reference();
    const GridFilter grid(p, 2000);
    auto density = GridDensity::point_mass(2000, 1.0);
    std::vector<double> ref;
    for (int k = 0; k < 3; ++k) {
      density = grid.step(density, 0.0);
      ref.push_back(density.mean());
    }
    CHECK(ref[0] == doctest::Approx(0.7482).epsilon(5e-4));
    CHECK(ref[1] == doctest::Approx(0.4653).epsilon(5e-4));
    CHECK(ref[2] == doctest::Approx(0.2044).epsilon(5e-4));
    CHECK(ref[2] < p.trust_threshold);

    double first = 0.0;
    for (int seed = 0; seed < 100; ++seed) {
      Rng rng(static_cast<std::uint64_t>(seed));
      const auto out = filter_step(ParticleSet::full_trust(p.particle_count), std::optional<double>(0.0), p, rng);
      CHECK(out.estimate.value() < 0.85);
      first += out.estimate.value() / 100.0;
    }
    CHECK(std::abs(first - ref[0]) < 0.05);
  }
}

TEST_CASE("filter_step from observations") {
  const auto p = ModelParams::reference();
  Rng a(9), b(9);
  const auto obs = community(20.0, {21, 19, 35, 20});
  const auto via_obs = filter_step(ParticleSet::full_trust(20), obs, p, a);
  const auto via_vote = filter_step(ParticleSet::full_trust(20), std::optional<double>(0.75), p, b);
  CHECK(via_obs.particles == via_vote.particles);

  SUBCASE("sleeper and empty community only predict") {
    const ParticleSet start({0.2, 0.9, 0.5}, {0.5, 0.3, 0.2});
    for (const auto& o : {community(std::nullopt, {20, 21}), community(20.0, {})}) {
      Rng r(4);
      const auto out = filter_step(start, o, p, r);
      CHECK_FALSE(out.resampled);
      CHECK(std::equal(out.particles.weights().begin(), out.particles.weights().end(),
                       start.weights().begin()));
    }
  }
  SUBCASE("mismatched trusts are rejected") {
    auto o = community(20.0, {20, 21});
    o.member_trusts.pop_back();
    Rng r(4);
    CHECK_THROWS_AS(filter_step(ParticleSet::full_trust(5), o, p, r), InvalidConfig);
  }
}

TEST_CASE("degenerate weights fall back to uniform") {
  ModelParams p;
  p.likelihood_sharpness = 1e-6;
  p.resample = false;
  // Every particle sits near 1, so exp(-|lambda - 0| / 1e-6) underflows to 0.
  const ParticleSet start(std::vector<double>(10, 1.0), std::vector<double>(10, 0.1));
  ModelParams tight = p;
  tight.forgetting = 1.0;
  tight.process_variance = 1e-8;
  Rng rng(1);
  const auto out = filter_step(start, std::optional<double>(0.0), tight, rng);
  CHECK(out.degenerate);
  for (double w : out.particles.weights()) CHECK(w == doctest::Approx(0.1));
  check_invariants(out.particles);
}

TEST_CASE("property: normalization, range, and determinism over random runs") {
  Rng gen(2024);
  std::uniform_int_distribution<int> votes(0, 8);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 60; ++trial) {
    ModelParams p;
    p.particle_count = 5 + static_cast<std::size_t>(trial % 40);
    p.forgetting = unit(gen);
    p.process_variance = 0.001 + 0.1 * unit(gen);
    p.likelihood_sharpness = 0.02 + 0.9 * unit(gen);
    p.resample = trial % 3 != 0;
    const auto seed = static_cast<std::uint64_t>(trial) * 7919;
    Rng r1(seed), r2(seed);
    auto s1 = ParticleSet::full_trust(p.particle_count);
    auto s2 = s1;
    for (int k = 0; k < 25; ++k) {
      std::optional<double> v;
      if (unit(gen) > 0.2) v = votes(gen) / 8.0;
      auto o1 = filter_step(s1, v, p, r1);
      auto o2 = filter_step(s2, v, p, r2);
      check_invariants(o1.particles);
      CHECK(o1.estimate.value() >= 0.0);
      CHECK(o1.estimate.value() <= 1.0);
      REQUIRE(o1.particles == o2.particles);
      s1 = std::move(o1.particles);
      s2 = std::move(o2.particles);
    }
  }
}

TEST_CASE("property: sleeper decay follows alpha^m") {
  ModelParams p;
  p.particle_count = 500;
  p.process_variance = 1e-4;
  for (int seed = 0; seed < 10; ++seed) {
    Rng rng(static_cast<std::uint64_t>(seed));
    auto state = ParticleSet::full_trust(p.particle_count);
    for (int m = 1; m <= 10; ++m) {
      auto out = filter_step(state, std::nullopt, p, rng);
      CHECK(std::abs(out.estimate.value() - std::pow(p.forgetting, m)) <= 0.05);
      state = std::move(out.particles);
    }
  }
}
