#pragma once

#include <memory>
#include <string>
#include <vector>

#include "imcopt/netgraph.hpp"
#include "imcopt/policy.hpp"

namespace imcopt {

// Deterministic synthetic accuracy model: a full-precision accuracy minus a
// per-layer degradation that grows exponentially as bitwidths shrink,
//   acc_fp - sum_l sigma_l * ((2^(8-w_l)-1)*eps_w + (2^(8-a_l)-1)*eps_a),
// clamped to [0,1]. Monotone non-decreasing in every bitwidth.
struct ProxyParams {
  double acc_fp = 0.71;
  std::vector<double> sigma;  // per-layer; empty = uniform 1/L
  double eps_w = 1e-4;
  double eps_a = 1e-4;
};

double proxy_accuracy(const QuantPolicy& policy, const ProxyParams& params);

// Line-delimited JSON protocol with an external evaluator process (see
// docs/oracle-protocol.md). One in-flight request per child.
std::string oracle_request_json(const std::string& network_name, const NetworkGraph& net,
                                const QuantPolicy& policy);
QuantPolicy parse_oracle_request(const std::string& line, std::string* network_name = nullptr);
double parse_oracle_response(const std::string& line);

class AccuracyOracle {
 public:
  static AccuracyOracle proxy(ProxyParams params);
  static AccuracyOracle external(std::string command, double timeout_s = 60.0);

  // Throws Error(ErrorKind::oracle) on protocol failure / out-of-range result.
  double evaluate(const NetworkGraph& net, const QuantPolicy& policy) const;

  bool is_proxy() const { return kind_ == Kind::proxy; }

  AccuracyOracle(AccuracyOracle&&) noexcept;
  AccuracyOracle& operator=(AccuracyOracle&&) noexcept;
  ~AccuracyOracle();

 private:
  AccuracyOracle();
  enum class Kind { proxy, external };
  Kind kind_ = Kind::proxy;
  ProxyParams proxy_;
  std::string command_;
  double timeout_s_ = 60.0;
  struct Child;
  mutable std::unique_ptr<Child> child_;
};

}  // namespace imcopt
