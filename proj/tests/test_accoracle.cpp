#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "imcopt/accoracle.hpp"
#include "imcopt/error.hpp"
#include "imcopt/netgraph.hpp"

using namespace imcopt;

namespace {

NetworkGraph tiny_net() {
  return parse_network(R"({"name":"tiny","layers":[
    {"name":"a","kind":"fc","c":16,"n":16},
    {"name":"b","kind":"fc","c":16,"n":16},
    {"name":"c","kind":"fc","c":16,"n":16}]})");
}

}  // namespace

TEST_CASE("proxy: all-8-bit policies score exactly acc_fp") {
  ProxyParams params;
  params.acc_fp = 0.71;
  params.sigma = {0.3, 0.5, 0.2};
  const QuantPolicy p = QuantPolicy::uniform(3, 8);
  CHECK(proxy_accuracy(p, params) == 0.71);
}

TEST_CASE("proxy: zero sensitivity ignores the policy") {
  ProxyParams params;
  params.acc_fp = 0.5;
  params.sigma = {0.0, 0.0, 0.0};
  QuantPolicy p = QuantPolicy::uniform(3, 2);
  CHECK(proxy_accuracy(p, params) == 0.5);
}

TEST_CASE("proxy: one layer dropped 8->2 bits costs 63e-4") {
  ProxyParams params;
  params.acc_fp = 0.71;
  params.sigma = {1.0, 0.0, 0.0};
  QuantPolicy p = QuantPolicy::uniform(3, 8);
  p.bits[0].w_bits = 2;
  CHECK(proxy_accuracy(p, params) == doctest::Approx(0.71 - 0.0063).epsilon(1e-12));
}

TEST_CASE("proxy: monotone non-decreasing in every bitwidth, clamped to [0,1]") {
  std::mt19937 rng(9);
  std::uniform_int_distribution<int> bd(2, 8);
  std::uniform_real_distribution<double> sd(0.0, 2.0);
  for (int t = 0; t < 200; ++t) {
    ProxyParams params;
    params.acc_fp = 0.71;
    params.sigma = {sd(rng), sd(rng), sd(rng)};
    QuantPolicy p;
    p.bits = {{bd(rng), bd(rng)}, {bd(rng), bd(rng)}, {bd(rng), bd(rng)}};
    const double base = proxy_accuracy(p, params);
    CHECK(base >= 0.0);
    CHECK(base <= 1.0);
    QuantPolicy up = p;
    const int l = t % 3;
    if (t % 2 == 0) up.bits[l].w_bits = std::min(8, up.bits[l].w_bits + 1);
    else up.bits[l].a_bits = std::min(8, up.bits[l].a_bits + 1);
    CHECK(proxy_accuracy(up, params) >= base);
  }
}

TEST_CASE("protocol: request round-trips the policy losslessly") {
  const NetworkGraph net = tiny_net();
  std::mt19937 rng(10);
  std::uniform_int_distribution<int> bd(2, 8);
  for (int t = 0; t < 50; ++t) {
    QuantPolicy p;
    p.bits = {{bd(rng), bd(rng)}, {bd(rng), bd(rng)}, {bd(rng), bd(rng)}};
    std::string name;
    const QuantPolicy back = parse_oracle_request(oracle_request_json("tiny", net, p), &name);
    CHECK(back == p);
    CHECK(name == "tiny");
  }
}

TEST_CASE("external: echo stub passes accuracy through") {
  const NetworkGraph net = tiny_net();
  const QuantPolicy p = QuantPolicy::uniform(3, 8);
  auto oracle = AccuracyOracle::external(
      R"(while read line; do echo '{"accuracy": 0.7}'; done)", 10.0);
  CHECK(oracle.evaluate(net, p) == 0.7);
  CHECK(oracle.evaluate(net, p) == 0.7);  // child is reused
}

TEST_CASE("external: out-of-range accuracy is an oracle failure") {
  const NetworkGraph net = tiny_net();
  const QuantPolicy p = QuantPolicy::uniform(3, 8);
  auto oracle = AccuracyOracle::external(
      R"(while read line; do echo '{"accuracy": 1.5}'; done)", 10.0);
  CHECK_THROWS_AS(oracle.evaluate(net, p), Error);
  try {
    oracle.evaluate(net, p);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::oracle);
  }
}

TEST_CASE("external: hang past the timeout is an oracle failure") {
  const NetworkGraph net = tiny_net();
  const QuantPolicy p = QuantPolicy::uniform(3, 8);
  auto oracle = AccuracyOracle::external("sleep 30", 0.2);
  CHECK_THROWS_AS(oracle.evaluate(net, p), Error);
}

TEST_CASE("external: malformed response and dead child are oracle failures") {
  const NetworkGraph net = tiny_net();
  const QuantPolicy p = QuantPolicy::uniform(3, 8);
  auto garbage = AccuracyOracle::external(R"(while read line; do echo 'nope'; done)", 10.0);
  CHECK_THROWS_AS(garbage.evaluate(net, p), Error);
  auto dead = AccuracyOracle::external("true", 2.0);
  CHECK_THROWS_AS(dead.evaluate(net, p), Error);
}

TEST_CASE("external: recovers by respawning after a failure") {
  const NetworkGraph net = tiny_net();
  const QuantPolicy p = QuantPolicy::uniform(3, 8);
  // First spawn dies instantly; the next request spawns a fresh child.
  auto oracle = AccuracyOracle::external(
      R"(while read line; do echo '{"accuracy": 0.25}'; done)", 10.0);
  CHECK(oracle.evaluate(net, p) == 0.25);
}
